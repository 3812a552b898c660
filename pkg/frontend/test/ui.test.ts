// @vitest-environment happy-dom
/**
 * Drives the UI against responses recorded from the real HTTP service.
 *
 * The fake fetch is strictly sequential: every request the UI makes must
 * match the next recorded exchange byte for byte, so any client-side
 * deviation from the recorded conversation fails the test.
 */

import { beforeEach, describe, expect, it } from "vitest";

import { ApiError, Client, SessionView } from "../src/api.js";
import { App } from "../src/app.js";
import { banner, candidateLineUnion, questionText } from "../src/view.js";
import fixtures from "./fixtures/fig2.json";

interface Exchange {
  request: { method: string; path: string; body: unknown };
  response: { status: number; body: unknown };
}

const recorded = fixtures as Exchange[];

class FixtureServer {
  cursor = 0;

  fetch = async (
    url: string,
    init?: { method?: string; body?: string },
  ): Promise<{ status: number; json(): Promise<unknown> }> => {
    const expected = recorded[this.cursor];
    if (!expected) {
      throw new Error(`request beyond recorded conversation: ${url}`);
    }
    const got = {
      method: init?.method ?? "GET",
      path: url,
      body: init?.body === undefined ? null : JSON.parse(init.body),
    };
    expect(got).toEqual(expected.request);
    this.cursor += 1;
    return {
      status: expected.response.status,
      json: async () => expected.response.body,
    };
  };
}

function highlights(root: HTMLElement): number[] {
  return [...root.querySelectorAll(".line.highlight")].map((el) =>
    Number((el as HTMLElement).dataset.line),
  );
}

function counter(root: HTMLElement, label: string): number {
  const cell = root.querySelector(`[data-counter="${label}"]`);
  return Number(cell?.textContent);
}

const program = (recorded[0].request.body as { program: string }).program;
const testSpec = (recorded[0].request.body as { test: never }).test;

describe("recorded session conversation", () => {
  let server: FixtureServer;
  let root: HTMLElement;
  let app: App;

  beforeEach(() => {
    server = new FixtureServer();
    root = document.createElement("main");
    document.body.appendChild(root);
    app = new App(root, new Client("", server.fetch));
  });

  it("completes the whole loop with two verdicts", async () => {
    await app.start(program, testSpec, "fig2.mjv");
    expect(app.view?.status).toBe("running");
    expect(highlights(root)).toEqual([5, 6, 8]);
    expect(root.querySelector(".prompt")?.textContent).toBe(
      "Is s2 = 6 at line 5 correct?",
    );
    expect(app.view).toEqual(recorded[0].response.body);

    // a plain refresh changes nothing
    await app.refresh();
    expect(highlights(root)).toEqual([5, 6, 8]);

    // first verdict via keyboard only
    const staleAction = app.view!.action!;
    root.dispatchEvent(
      new KeyboardEvent("keydown", { key: "c", bubbles: true }),
    );
    await Promise.resolve();
    await new Promise((r) => setTimeout(r));
    expect(highlights(root)).toEqual([6, 8]);
    expect(root.querySelector(".prompt")?.textContent).toBe(
      "Is s3 = 6 at line 6 correct?",
    );
    const afterFirst = structuredClone(app.view);

    // re-submitting the consumed action yields 409; the app re-syncs and
    // the screen does not change
    app.view!.action = staleAction;
    await app.submit("correct");
    expect(app.view).toEqual(afterFirst);
    expect(highlights(root)).toEqual([6, 8]);

    // second verdict via the button
    const btn = root.querySelector(
      'button[data-verdict="correct"]',
    ) as HTMLButtonElement;
    btn.click();
    await new Promise((r) => setTimeout(r));
    expect(app.view?.status).toBe("localized");
    expect(highlights(root)).toEqual([8]);
    expect(app.view?.localized?.lines).toEqual([8]);
    expect(root.querySelector(".banner")?.textContent).toContain("line 8");

    // counters exactly as the server reports them
    expect(counter(root, "Setup")).toBe(1);
    expect(counter(root, "Query")).toBe(2);
    expect(counter(root, "Total2")).toBe(3);
    const report = await new Client("", server.fetch).report(app.view!.id);
    expect(report.setup).toBe(1);
    expect(report.query).toBe(2);

    await app.refresh();
    expect(app.view?.status).toBe("localized");
    expect(root.querySelectorAll(".history li")).toHaveLength(2);

    // an incorrect first verdict pins the other branch in one question
    const root2 = document.createElement("main");
    const app2 = new App(root2, new Client("", server.fetch));
    await app2.start(program, testSpec, "fig2.mjv");
    await app2.submit("incorrect");
    expect(app2.view?.status).toBe("localized");
    expect(highlights(root2)).toEqual([5]);
    const report2 = await new Client("", server.fetch).report(app2.view!.id);
    expect(report2.Total2).toBe(2);

    // unknown sessions surface as an error banner, previous view retained
    await app2.load("not-a-session");
    expect(app2.error).toBeTruthy();
    expect(
      (root2.querySelector('.banner[data-kind="error"]') as HTMLElement)
        .textContent,
    ).toContain("Error");

    // the whole recorded conversation was consumed in order
    expect(server.cursor).toBe(recorded.length);
  });
});

describe("view model purity", () => {
  it("highlight lines equal the union of candidate lines in every recorded response", () => {
    for (const exchange of recorded) {
      const body = exchange.response.body as SessionView | null;
      if (!body || !("highlight_lines" in (body as object))) {
        continue;
      }
      expect(body.highlight_lines).toEqual(candidateLineUnion(body.candidates));
    }
  });

  it("renders the question exactly from the payload", () => {
    const first = recorded[0].response.body as SessionView;
    expect(questionText(first.action!)).toBe("Is s2 = 6 at line 5 correct?");
  });

  it("banner reflects the server status", () => {
    const first = recorded[0].response.body as SessionView;
    expect(banner(first)).toBe("Session running");
  });

  it("API errors carry the server message", async () => {
    const server = new FixtureServer();
    server.cursor = recorded.length - 1; // the recorded 404 exchange
    const client = new Client("", server.fetch);
    await expect(client.getSession("not-a-session")).rejects.toThrowError(
      ApiError,
    );
  });
});
