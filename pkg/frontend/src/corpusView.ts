// DOM rendering for corpus-class review: the class table, the member list
// of the selected class with move/split/designate actions, and the pending
// edit buffer (edits appear in the table only once acknowledged).

import { ClassView } from "./api.js";
import { CorpusState, CorpusStore } from "./corpusStore.js";

export class CorpusView {
  private splitSelection = new Set<string>();

  constructor(private root: HTMLElement, private store: CorpusStore) {
    store.subscribe((state) => this.render(state));
  }

  private render(state: CorpusState) {
    this.root.replaceChildren();
    if (state.error) {
      this.root.append(el("div", "banner error", state.error));
    }

    const table = el("table", "class-table");
    table.id = "class-table";
    const head = el("tr", "");
    for (const h of ["class", "tag sequence", "size", "representative", "provenance"]) {
      head.append(el("th", "", h));
    }
    table.append(head);
    for (const cls of state.classes) {
      const tr = el("tr", cls.id === state.selected ? "selected" : "");
      tr.dataset.classId = cls.id;
      tr.append(
        el("td", "cls-id", cls.id),
        el("td", "cls-tags", cls.tag_sequence.join(" ")),
        el("td", "cls-size", String(cls.members.length)),
        el("td", "cls-rep", cls.representative ?? "(auto)"),
        el("td", "cls-prov", cls.provenance),
      );
      tr.addEventListener("click", () => {
        this.splitSelection.clear();
        this.store.select(cls.id);
      });
      table.append(tr);
    }
    this.root.append(table);

    const selected = state.classes.find((c) => c.id === state.selected);
    if (selected) {
      this.root.append(this.renderMembers(selected, state));
    }

    const buffer = el("div", "pending");
    buffer.id = "pending-edits";
    buffer.append(el("h3", "", `Pending edits (${state.pending.length})`));
    for (const edit of state.pending) {
      buffer.append(el("div", "pending-edit", JSON.stringify(edit)));
    }
    const apply = button("Apply edits", () => void this.store.commit());
    apply.id = "apply-edits";
    apply.disabled = !state.pending.length || state.busy;
    const discard = button("Discard", () => this.store.discard());
    buffer.append(apply, discard);
    this.root.append(buffer);
  }

  private renderMembers(cls: ClassView, state: CorpusState): HTMLElement {
    const box = el("div", "members");
    box.id = "member-list";
    box.append(el("h3", "", `Members of ${cls.id}`));
    for (const member of cls.members) {
      const row = el("div", "member");
      row.dataset.ref = member.ref;
      const check = document.createElement("input");
      check.type = "checkbox";
      check.checked = this.splitSelection.has(member.ref);
      check.addEventListener("change", () => {
        if (check.checked) this.splitSelection.add(member.ref);
        else this.splitSelection.delete(member.ref);
      });
      row.append(check, el("span", "member-text", member.text));
      const designate = button("representative", () =>
        this.store.stage({ op: "designate", class: cls.id, member: member.ref }));
      designate.className = "designate";
      row.append(designate);
      const moveTo = document.createElement("select");
      moveTo.className = "move-target";
      moveTo.append(new Option("move to...", ""));
      for (const other of state.classes) {
        if (other.id !== cls.id) moveTo.append(new Option(other.id, other.id));
      }
      moveTo.addEventListener("change", () => {
        if (moveTo.value) {
          this.store.stage({ op: "move", member: member.ref, from: cls.id, to: moveTo.value });
          moveTo.value = "";
        }
      });
      row.append(moveTo);
      box.append(row);
    }
    const split = button("Split selected into new class", () => {
      if (this.splitSelection.size) {
        this.store.stage({ op: "split", class: cls.id,
                           members: [...this.splitSelection] });
        this.splitSelection.clear();
      }
    });
    split.id = "split-selected";
    box.append(split);
    return box;
  }
}

function el(tag: string, className: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function button(text: string, onClick: () => void): HTMLButtonElement {
  const b = document.createElement("button");
  b.textContent = text;
  b.addEventListener("click", onClick);
  return b;
}
