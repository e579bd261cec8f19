import test from "node:test";
import assert from "node:assert/strict";

import { actionForKey } from "../src/keyboard.js";

test("g labels good, b labels bad", () => {
  assert.deepEqual(actionForKey("g"), { kind: "label", label: "good" });
  assert.deepEqual(actionForKey("b"), { kind: "label", label: "bad" });
});

test("s and ArrowRight skip, ArrowLeft goes back", () => {
  assert.deepEqual(actionForKey("s"), { kind: "skip" });
  assert.deepEqual(actionForKey("ArrowRight"), { kind: "skip" });
  assert.deepEqual(actionForKey("ArrowLeft"), { kind: "prev" });
});

test("n/p page forward and back", () => {
  assert.deepEqual(actionForKey("n"), { kind: "next-page" });
  assert.deepEqual(actionForKey("p"), { kind: "prev-page" });
});

test("unknown keys are ignored", () => {
  assert.equal(actionForKey("x"), null);
  assert.equal(actionForKey("Enter"), null);
});
