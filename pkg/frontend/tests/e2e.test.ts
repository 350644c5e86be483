// End-to-end against a real service instance: an annotator fully resolves
// the five-sentence toy treebank; after every acknowledged click the
// store's state equals the service's; undo restores the prior state; the
// corpus view's move/split/designate keep the partition invariant.

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { Client } from "../src/api.js";
import { checkPartition, CorpusStore } from "../src/corpusStore.js";
import { TreebankStore } from "../src/treebankStore.js";
import { RunningService, startService, TOY_SENTENCES, until } from "./harness.js";

let service: RunningService;
let client: Client;

beforeAll(async () => {
  service = await startService(8851);
  client = new Client(service.base);
}, 60_000);

afterAll(async () => {
  await service?.stop();
});

async function serviceRemaining(id: string): Promise<number> {
  const sentences = await client.sentences();
  const found = sentences.find((s) => s.id === id);
  if (!found) throw new Error(`no sentence ${id}`);
  return found.remaining;
}

describe("treebank annotation end to end", () => {
  it("fully resolves the five-sentence toy treebank", async () => {
    const sentences = await client.sentences();
    expect(sentences.length).toBe(TOY_SENTENCES.length);
    for (const sentence of sentences) {
      const store = new TreebankStore(client);
      await store.load(sentence.id);
      expect(store.current.sentence?.analyses).toBeGreaterThan(1);
      let guard = 0;
      while (store.current.sentence?.status === "open") {
        const row = store.current.rows.find((r) => r.verdict === null);
        expect(row).toBeDefined();
        await store.judge(row!.key, "correct");
        // the rendered count is exactly what the service reports
        expect(store.current.sentence!.remaining).toBe(
          await serviceRemaining(sentence.id));
        expect(store.current.sentence!.status).not.toBe("contradiction");
        expect(++guard).toBeLessThan(50);
      }
      await store.resolve("accept-set");
      const status = store.current.sentence!.status;
      expect(["resolved-unique", "resolved-set"]).toContain(status);
      expect(store.current.sentence!.approved?.length).toBeGreaterThan(0);
    }
    const resolved = await client.sentences();
    for (const s of resolved) {
      expect(s.approved?.length).toBeGreaterThan(0);
    }
  }, 60_000);

  it("undo restores the prior state", async () => {
    const store = new TreebankStore(client);
    await store.load("0");
    const before = JSON.stringify({
      remaining: store.current.sentence?.remaining,
      judged: store.current.sentence?.judged,
      rows: store.current.rows,
    });
    const row = store.current.rows.find((r) => r.verdict === null)
      ?? store.current.rows[0];
    // session 0 may be resolved already: undo still pops its last judgment
    if (row && row.verdict === null) {
      await store.judge(row.key, "incorrect");
      expect(store.current.sentence?.judged).toBeGreaterThan(0);
      await store.undo();
      const after = JSON.stringify({
        remaining: store.current.sentence?.remaining,
        judged: store.current.sentence?.judged,
        rows: store.current.rows,
      });
      expect(after).toBe(before);
    }
  }, 30_000);

  it("reports a conflict when the session advances elsewhere", async () => {
    const a = new TreebankStore(client);
    const b = new TreebankStore(client);
    await a.load("1");
    await b.load("1");
    const free = a.current.rows.filter((r) => r.verdict === null);
    if (free.length >= 2) {
      await a.judge(free[0]!.key, "incorrect");
      // b still holds the old version number; its judgment must 409 and
      // the store must recover by reloading
      await b.judge(free[1]!.key, "incorrect");
      expect(b.current.conflict).toBe(true);
      expect(b.current.sentence?.remaining).toBe(await serviceRemaining("1"));
      await a.undo();
      await b.undo();
    }
  }, 30_000);
});

describe("corpus class review end to end", () => {
  it("executes move, split and designate without breaking the partition", async () => {
    const store = new CorpusStore(client);
    await store.load();
    checkPartition(store.current.classes);
    const sizes = () =>
      Object.fromEntries(store.current.classes.map((c) => [c.id, c.members.length]));

    const big = [...store.current.classes].sort(
      (x, y) => y.members.length - x.members.length)[0]!;
    const other = store.current.classes.find((c) => c.id !== big.id)!;
    const before = sizes();

    store.stage({ op: "move", member: big.members[0]!.ref,
                  from: big.id, to: other.id });
    // pending edits are not applied until acknowledged
    expect(sizes()).toEqual(before);
    await store.commit();
    checkPartition(store.current.classes);
    const after = sizes();
    expect(after[other.id]).toBe(before[other.id]! + 1);

    const splittable = store.current.classes.find((c) => c.members.length >= 2)!;
    store.stage({ op: "split", class: splittable.id,
                  members: [splittable.members[0]!.ref] });
    await store.commit();
    checkPartition(store.current.classes);
    const total = (cs: typeof store.current.classes) =>
      cs.reduce((n, c) => n + c.members.length, 0);
    expect(total(store.current.classes)).toBe(
      Object.values(before).reduce((a, b) => a + b, 0));

    const target = store.current.classes.find((c) => c.members.length >= 2)!;
    const rep = target.members[target.members.length - 1]!.ref;
    store.stage({ op: "designate", class: target.id, member: rep });
    await store.commit();
    checkPartition(store.current.classes);
    const updated = store.current.classes.find((c) => c.id === target.id)!;
    expect(updated.representative).toBe(rep);

    await store.refreshReport();
    const reportSizes = store.current.report.map((r) => r.size);
    expect(reportSizes).toEqual([...reportSizes].sort((a, b) => b - a));
  }, 30_000);

  it("surfaces validation failures and keeps the buffer", async () => {
    const store = new CorpusStore(client);
    await store.load();
    store.stage({ op: "move", member: "nope.99", from: "c0000", to: "c0001" });
    await store.commit();
    expect(store.current.error).toContain("corpus");
    expect(store.current.pending.length).toBe(1);
    store.discard();
    expect(store.current.pending.length).toBe(0);
  }, 30_000);
});
