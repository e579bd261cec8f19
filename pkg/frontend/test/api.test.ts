import test from "node:test";
import assert from "node:assert/strict";

import { ApiError, ReviewApi } from "../src/api.js";

interface Captured {
  url: string;
  init?: RequestInit;
}

function fetchStub(status: number, body: string, captured: Captured[] = []) {
  const fn = async (url: string, init?: RequestInit): Promise<Response> => {
    captured.push({ url, init });
    return new Response(body, {
      status,
      headers: { "Content-Type": "application/json" },
    });
  };
  return { fn, captured };
}

test("pending builds the documented query string", async () => {
  const { fn, captured } = fetchStub(200, JSON.stringify({ items: [], page: 2, size: 10, total: 0 }));
  const api = new ReviewApi("http://x", fn);
  const page = await api.pending(2, 10, "unlabeled");
  assert.equal(captured[0].url, "http://x/api/pending?page=2&size=10&filter=unlabeled");
  assert.equal(page.page, 2);
});

test("submitLabel posts the JSON envelope", async () => {
  const { fn, captured } = fetchStub(200, JSON.stringify({ ok: true }));
  const api = new ReviewApi("", fn);
  await api.submitLabel("img_a-00", "good", "me");
  assert.equal(captured[0].url, "/api/label");
  assert.equal(captured[0].init?.method, "POST");
  assert.deepEqual(JSON.parse(String(captured[0].init?.body)), {
    id: "img_a-00",
    label: "good",
    annotator: "me",
  });
});

test("non-200 becomes ApiError with the server's error field", async () => {
  const { fn } = fetchStub(404, JSON.stringify({ error: "UnknownId" }));
  const api = new ReviewApi("", fn);
  await assert.rejects(
    api.submitLabel("nope", "good", "me"),
    (err: unknown) => err instanceof ApiError && err.status === 404 && err.message === "UnknownId",
  );
});

test("network failure becomes ApiError status 0", async () => {
  const api = new ReviewApi("", async () => {
    throw new TypeError("fetch failed");
  });
  await assert.rejects(
    api.pending(1, 10, "all"),
    (err: unknown) => err instanceof ApiError && err.status === 0,
  );
});

test("exportLabels parses line-delimited JSON", async () => {
  const body =
    JSON.stringify({ id: "a", crop: "c/a.png", label: "good" }) +
    "\n" +
    JSON.stringify({ id: "b", crop: "c/b.png", label: "bad" }) +
    "\n";
  const { fn } = fetchStub(200, body);
  const api = new ReviewApi("", fn);
  const lines = await api.exportLabels();
  assert.equal(lines.length, 2);
  assert.deepEqual(lines[1], { id: "b", crop: "c/b.png", label: "bad" });
});

test("triage encodes the source filter", async () => {
  const { fn, captured } = fetchStub(200, JSON.stringify({ items: [], source: "img a" }));
  const api = new ReviewApi("", fn);
  await api.triage("img a");
  assert.equal(captured[0].url, "/api/triage?source=img%20a");
});
