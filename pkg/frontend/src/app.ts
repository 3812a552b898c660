/** Thin DOM layer: renders the last server response, forwards verdicts.
 *
 * No optimistic updates: the screen changes only after a server response
 * arrives. A stale answer (409) triggers a silent refresh; while a request
 * is in flight further submissions are ignored, so double activation of a
 * control cannot double-submit.
 */

import { ApiError, Client, SessionView, TestSpec } from "./api.js";
import {
  banner,
  counterRows,
  historyRows,
  questionText,
  answerChoices,
  sourceLines,
  expandable,
} from "./view.js";

export class App {
  view: SessionView | null = null;
  error: string | null = null;
  private inflight = false;

  constructor(
    private readonly root: HTMLElement,
    private readonly client: Client,
  ) {
    root.addEventListener("keydown", (ev) => this.onKey(ev as KeyboardEvent));
  }

  async start(program: string, test: TestSpec, name?: string): Promise<void> {
    await this.transition(() => this.client.createSession(program, test, name));
  }

  async refresh(): Promise<void> {
    if (this.view) {
      await this.transition(() => this.client.getSession(this.view!.id));
    }
  }

  async load(sessionId: string): Promise<void> {
    await this.transition(() => this.client.getSession(sessionId));
  }

  async submit(verdict: string | number): Promise<void> {
    const action = this.view?.action;
    if (!action || this.inflight) {
      return;
    }
    await this.transition(async () => {
      try {
        return await this.client.answer(this.view!.id, action.action_id, verdict);
      } catch (err) {
        if (err instanceof ApiError && err.status === 409) {
          // the action was already consumed: re-sync silently
          return await this.client.getSession(this.view!.id);
        }
        throw err;
      }
    });
  }

  async expand(component: string): Promise<void> {
    if (!this.view || this.inflight) {
      return;
    }
    await this.transition(() => this.client.expand(this.view!.id, component));
  }

  private async transition(fn: () => Promise<SessionView>): Promise<void> {
    this.inflight = true;
    try {
      this.view = await fn();
      this.error = null;
    } catch (err) {
      this.error = err instanceof Error ? err.message : String(err);
    } finally {
      this.inflight = false;
    }
    this.render();
  }

  private onKey(ev: KeyboardEvent): void {
    const action = this.view?.action;
    if (!action) {
      return;
    }
    const choices = answerChoices(action);
    if (ev.key === "c" && choices.includes("correct")) {
      void this.submit("correct");
    } else if (ev.key === "i" && choices.includes("incorrect")) {
      void this.submit("incorrect");
    }
  }

  render(): void {
    this.root.textContent = "";
    if (this.error !== null) {
      this.root.appendChild(this.renderBanner(`Error: ${this.error}`, "error"));
      if (this.view) {
        this.root.appendChild(this.makeButton("Retry", () => void this.refresh()));
      }
    }
    const view = this.view;
    if (!view) {
      return;
    }
    this.root.appendChild(this.renderBanner(banner(view), view.status));
    this.root.appendChild(this.renderSource(view));
    this.root.appendChild(this.renderQuestion(view));
    this.root.appendChild(this.renderCounters(view));
    this.root.appendChild(this.renderHistory(view));
  }

  private renderBanner(text: string, kind: string): HTMLElement {
    const el = this.el("div", "banner");
    el.dataset.kind = kind;
    el.textContent = text;
    return el;
  }

  private renderSource(view: SessionView): HTMLElement {
    const pane = this.el("div", "source");
    for (const line of sourceLines(view)) {
      const row = this.el("div", "line");
      row.dataset.line = String(line.number);
      if (line.highlighted) {
        row.classList.add("highlight");
      }
      const num = this.el("span", "lineno");
      num.textContent = String(line.number);
      const text = this.el("span", "code");
      text.textContent = line.text;
      row.append(num, text);
      if (line.badges.length > 0) {
        const badge = this.el("span", "badges");
        badge.textContent = [...new Set(line.badges)].join(" ");
        row.appendChild(badge);
      }
      pane.appendChild(row);
    }
    for (const component of expandable(view)) {
      const btn = this.makeButton(`Expand ${component}`, () => void this.expand(component));
      btn.className = "expand";
      btn.dataset.component = component;
      pane.appendChild(btn);
    }
    return pane;
  }

  private renderQuestion(view: SessionView): HTMLElement {
    const pane = this.el("div", "question");
    const action = view.action;
    if (!action) {
      return pane;
    }
    const text = this.el("p", "prompt");
    text.textContent = questionText(action);
    pane.appendChild(text);
    const choices = answerChoices(action);
    if (action.kind === "AskFirstBadIteration") {
      const input = document.createElement("input");
      input.type = "number";
      input.min = "1";
      const send = this.makeButton("Answer", () => void this.submit(Number(input.value)));
      pane.append(input, send);
    } else if (action.kind === "AskSubExpression") {
      choices.forEach((choice, i) => {
        const btn = this.makeButton(choice, () => void this.submit(i));
        btn.dataset.choice = String(i);
        pane.appendChild(btn);
      });
    } else {
      for (const choice of choices) {
        const btn = this.makeButton(choice, () => void this.submit(choice));
        btn.dataset.verdict = choice;
        pane.appendChild(btn);
      }
    }
    return pane;
  }

  private renderCounters(view: SessionView): HTMLElement {
    const pane = this.el("table", "counters");
    for (const [label, value] of counterRows(view.counters)) {
      const row = document.createElement("tr");
      const name = document.createElement("td");
      name.textContent = label;
      const num = document.createElement("td");
      num.dataset.counter = label;
      num.textContent = String(value);
      row.append(name, num);
      pane.appendChild(row);
    }
    return pane;
  }

  private renderHistory(view: SessionView): HTMLElement {
    const pane = this.el("ul", "history");
    for (const row of historyRows(view)) {
      const item = document.createElement("li");
      item.textContent = `${row.question} -> ${row.answer}`;
      pane.appendChild(item);
    }
    return pane;
  }

  private el(tag: string, className: string): HTMLElement {
    const node = document.createElement(tag);
    node.className = className;
    return node;
  }

  private makeButton(label: string, onClick: () => void): HTMLButtonElement {
    const btn = document.createElement("button");
    btn.textContent = label;
    btn.addEventListener("click", onClick);
    return btn;
  }
}
