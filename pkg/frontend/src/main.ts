// Entry point: a sentence list plus the two task views, switched by tabs.

import { Client } from "./api.js";
import { CorpusStore } from "./corpusStore.js";
import { CorpusView } from "./corpusView.js";
import { TreebankStore } from "./treebankStore.js";
import { TreebankView } from "./treebankView.js";

export interface App {
  client: Client;
  treebank: TreebankStore;
  corpus: CorpusStore;
}

export function mount(root: HTMLElement, serviceBase: string): App {
  const client = new Client(serviceBase);
  const treebank = new TreebankStore(client);
  const corpus = new CorpusStore(client);

  root.replaceChildren();
  const tabs = document.createElement("nav");
  const treebankTab = tabButton("Treebank", () => show("treebank"));
  const corpusTab = tabButton("Corpus classes", () => show("corpus"));
  tabs.append(treebankTab, corpusTab);

  const sidebar = document.createElement("aside");
  sidebar.id = "sentence-list";
  const treebankPane = document.createElement("section");
  treebankPane.id = "treebank-pane";
  const corpusPane = document.createElement("section");
  corpusPane.id = "corpus-pane";
  corpusPane.style.display = "none";
  root.append(tabs, sidebar, treebankPane, corpusPane);

  new TreebankView(treebankPane, treebank);
  new CorpusView(corpusPane, corpus);

  function show(which: "treebank" | "corpus") {
    treebankPane.style.display = which === "treebank" ? "" : "none";
    sidebar.style.display = which === "treebank" ? "" : "none";
    corpusPane.style.display = which === "corpus" ? "" : "none";
    if (which === "corpus") void corpus.load();
  }

  async function refreshSentences() {
    const sentences = await client.sentences();
    sidebar.replaceChildren();
    for (const s of sentences) {
      const row = document.createElement("button");
      row.className = `sentence status-${s.status}`;
      row.dataset.sentenceId = s.id;
      row.textContent = `${s.text} [${s.status}, ${s.remaining}/${s.analyses}]`;
      row.addEventListener("click", () => void treebank.load(s.id));
      sidebar.append(row);
    }
  }

  treebank.subscribe(() => void refreshSentences());
  void refreshSentences();
  return { client, treebank, corpus };
}

function tabButton(label: string, onClick: () => void): HTMLButtonElement {
  const b = document.createElement("button");
  b.className = "tab";
  b.textContent = label;
  b.addEventListener("click", onClick);
  return b;
}

declare global {
  interface Window {
    sltWorkbench?: App;
  }
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  const base = new URLSearchParams(location.search).get("service")
    ?? "http://127.0.0.1:8040";
  window.sltWorkbench = mount(document.getElementById("app")!, base);
}
