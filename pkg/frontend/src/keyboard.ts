import type { Label } from "./types.js";

export type KeyAction =
  | { kind: "label"; label: Label }
  | { kind: "skip" }
  | { kind: "prev" }
  | { kind: "next-page" }
  | { kind: "prev-page" }
  | null;

/** g/b label the focused crop, s or ArrowRight skips, n/p flip pages. */
export function actionForKey(key: string): KeyAction {
  switch (key) {
    case "g":
      return { kind: "label", label: "good" };
    case "b":
      return { kind: "label", label: "bad" };
    case "s":
    case "ArrowRight":
      return { kind: "skip" };
    case "ArrowLeft":
      return { kind: "prev" };
    case "n":
    case "PageDown":
      return { kind: "next-page" };
    case "p":
    case "PageUp":
      return { kind: "prev-page" };
    default:
      return null;
  }
}
