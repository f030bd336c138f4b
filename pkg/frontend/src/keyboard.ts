/** Keyboard-driven review: 200-item batches want hands on the keys.
 *
 * The mapping is pure; the DOM listener lives in main.ts and skips events
 * originating in text inputs.
 */

export type ReviewAction =
  | { kind: "approve" }
  | { kind: "flag" }
  | { kind: "next" }
  | { kind: "prev" }
  | { kind: "toggle-item"; item: 0 | 1 | 2 }
  | { kind: "submit" };

export function actionForKey(key: string): ReviewAction | null {
  switch (key) {
    case "a":
      return { kind: "approve" };
    case "f":
      return { kind: "flag" };
    case "n":
    case "j":
      return { kind: "next" };
    case "p":
    case "k":
      return { kind: "prev" };
    case "1":
      return { kind: "toggle-item", item: 0 };
    case "2":
      return { kind: "toggle-item", item: 1 };
    case "3":
      return { kind: "toggle-item", item: 2 };
    case "Enter":
      return { kind: "submit" };
    default:
      return null;
  }
}

export function isTypingTarget(target: EventTarget | null): boolean {
  if (!target || typeof HTMLElement === "undefined" || !(target instanceof HTMLElement)) {
    return false;
  }
  return (
    target instanceof HTMLInputElement ||
    target instanceof HTMLTextAreaElement ||
    target.isContentEditable
  );
}
