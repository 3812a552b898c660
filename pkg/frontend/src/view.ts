/** Pure view-model helpers: server responses in, render data out.
 *
 * Everything here is a deterministic function of the last SessionView the
 * server returned, so snapshot tests against recorded responses pin the
 * whole presentation layer.
 */

import type { Action, Candidate, Counters, SessionView } from "./api.js";

export interface LineView {
  number: number;
  text: string;
  highlighted: boolean;
  badges: string[]; // candidate component ids covering this line
}

export function sourceLines(view: SessionView): LineView[] {
  const highlighted = new Set(view.highlight_lines);
  const badges = new Map<number, string[]>();
  for (const cand of view.candidates) {
    for (const line of cand.lines) {
      const list = badges.get(line) ?? [];
      list.push(...cand.components);
      badges.set(line, list);
    }
  }
  return view.source_lines.map((text, i) => ({
    number: i + 1,
    text,
    highlighted: highlighted.has(i + 1),
    badges: badges.get(i + 1) ?? [],
  }));
}

export function candidateLineUnion(candidates: Candidate[]): number[] {
  const lines = new Set<number>();
  for (const cand of candidates) {
    for (const line of cand.lines) {
      lines.add(line);
    }
  }
  return [...lines].sort((a, b) => a - b);
}

export function questionText(action: Action): string {
  const p = action.payload as Record<string, unknown>;
  switch (action.kind) {
    case "AskQuery":
      return `Is ${p.var ?? "the condition"} = ${p.value} at line ${p.line} correct?`;
    case "AskFirstBadIteration":
      return `First iteration of the loop at line ${p.line} with a wrong value?`;
    case "AskLoopCondition":
      return `Is the loop condition at line ${p.line} written correctly?`;
    case "AskSubExpression":
      return `Which sub-expression at line ${p.line} is wrong?`;
    default:
      return "";
  }
}

export function answerChoices(action: Action): string[] {
  if (action.kind === "AskSubExpression") {
    return (action.payload.choices as string[]) ?? [];
  }
  if (action.kind === "AskFirstBadIteration") {
    return [];
  }
  return ["correct", "incorrect"];
}

export const COUNTER_LABELS: Array<[string, keyof Counters]> = [
  ["Setup", "setup"],
  ["Query", "query"],
  ["Loop", "loop"],
  ["Exprs", "exprs"],
  ["Iter", "iter"],
  ["Total", "Total"],
  ["Total2", "Total2"],
];

export function counterRows(counters: Counters): Array<[string, number]> {
  return COUNTER_LABELS.map(([label, key]) => [label, Number(counters[key] ?? 0)]);
}

export function banner(view: SessionView): string {
  if (view.status === "localized") {
    const loc = view.localized;
    if (!loc || loc.lines.length === 0) {
      return "No fault: the test passes.";
    }
    return `Localized: line ${loc.lines.join(", ")} (${loc.reason})`;
  }
  if (view.status === "exhausted") {
    const loc = view.localized;
    const where = loc && loc.lines.length ? ` near line ${loc.lines.join(", ")}` : "";
    return `No further question can discriminate${where} (${loc?.reason ?? "exhausted"})`;
  }
  return "Session running";
}

export interface HistoryRow {
  question: string;
  answer: string;
}

export function historyRows(view: SessionView): HistoryRow[] {
  const rows: HistoryRow[] = [];
  for (const [act, answer] of view.history) {
    const action = act as unknown as Action;
    if (action.kind === "Report") {
      continue;
    }
    rows.push({ question: questionText(action), answer: String(answer) });
  }
  return rows;
}

/** Composite candidates that offer an Expand control. */
export function expandable(view: SessionView): string[] {
  const out: string[] = [];
  for (const cand of view.candidates) {
    if (cand.components.length === 1 && cand.lines.length > 1) {
      out.push(cand.components[0]);
    }
  }
  return out;
}
