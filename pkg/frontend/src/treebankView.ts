// DOM rendering for the annotation session: discriminant rows with
// correct/incorrect buttons, the live remaining-count, judgment history
// with undo, and resolve controls. Keyboard: c = correct, x = incorrect,
// u = undo (on the highlighted row).

import { DiscriminantRow } from "./api.js";
import { TreebankState, TreebankStore } from "./treebankStore.js";

export class TreebankView {
  private highlighted: string | null = null;

  constructor(private root: HTMLElement, private store: TreebankStore) {
    store.subscribe((state) => this.render(state));
    document.addEventListener("keydown", (ev) => this.onKey(ev));
  }

  private onKey(ev: KeyboardEvent) {
    if (ev.target instanceof HTMLInputElement) return;
    const state = this.store.current;
    if (!state.sentence) return;
    if (ev.key === "u") {
      void this.store.undo();
      return;
    }
    if ((ev.key === "c" || ev.key === "x") && this.highlighted) {
      void this.store.judge(this.highlighted, ev.key === "c" ? "correct" : "incorrect");
    }
  }

  private render(state: TreebankState) {
    const s = state.sentence;
    this.root.replaceChildren();
    if (!s) {
      this.root.append(el("p", "hint", "Pick a sentence to annotate."));
      return;
    }
    const head = el("div", "session-head");
    head.append(el("h2", "sentence-text", s.text));
    const counts = el("div", "counts");
    const remaining = el("span", "remaining-count", String(s.remaining));
    remaining.id = "remaining-count";
    counts.append(
      remaining,
      el("span", "counts-label", ` of ${s.analyses} analyses remain`),
      badge(`status: ${s.status}`, `status-${s.status}`),
    );
    head.append(counts);
    if (state.conflict) {
      head.append(el("div", "banner conflict", "Another session advanced this sentence; the view was reloaded."));
    }
    if (s.status === "contradiction") {
      head.append(el("div", "banner contradiction",
        "Contradiction: no analysis satisfies the judgments. Undo the last one."));
    }
    if (state.error) {
      head.append(el("div", "banner error", state.error));
    }
    this.root.append(head);

    const controls = el("div", "controls");
    const undo = button("Undo (u)", () => void this.store.undo());
    undo.id = "undo";
    undo.disabled = s.judged === 0 || state.busy;
    const resolveUnique = button("Resolve unique", () => void this.store.resolve("unique-required"));
    resolveUnique.id = "resolve-unique";
    const resolveSet = button("Accept remaining set", () => void this.store.resolve("accept-set"));
    resolveSet.id = "resolve-set";
    resolveSet.disabled = s.remaining === 0;
    controls.append(undo, resolveUnique, resolveSet);
    if (s.approved) {
      controls.append(badge(`approved: ${s.approved.length}`, "approved"));
    }
    this.root.append(controls);

    const list = el("div", "discriminants");
    list.id = "discriminant-list";
    for (const row of state.rows) {
      list.append(this.renderRow(row, state));
    }
    this.root.append(list);
  }

  private renderRow(row: DiscriminantRow, state: TreebankState): HTMLElement {
    const item = el("div", "discriminant");
    item.dataset.key = row.key;
    if (row.key === this.highlighted) item.classList.add("highlighted");
    if (row.verdict) {
      item.classList.add(`verdict-${row.verdict}`, `source-${row.source}`);
    }
    if (state.lastPropagated.includes(row.key)) {
      item.classList.add("just-propagated");
    }
    const label = el("span", "label", `${row.kind}: ${row.label}`);
    label.addEventListener("click", () => {
      this.highlighted = row.key;
      this.render(state);
    });
    item.append(label, el("span", "holds", `${row.holds}`));
    if (row.verdict) {
      item.append(badge(`${row.verdict} (${row.source})`, `source-${row.source}`));
    } else {
      const yes = button("correct", () => void this.store.judge(row.key, "correct"));
      yes.className = "judge-correct";
      const no = button("incorrect", () => void this.store.judge(row.key, "incorrect"));
      no.className = "judge-incorrect";
      item.append(yes, no);
    }
    return item;
  }
}

function el(tag: string, className: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function badge(text: string, className: string): HTMLElement {
  return el("span", `badge ${className}`, text);
}

function button(text: string, onClick: () => void): HTMLButtonElement {
  const b = document.createElement("button");
  b.textContent = text;
  b.addEventListener("click", onClick);
  return b;
}
