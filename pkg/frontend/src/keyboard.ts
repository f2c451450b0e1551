/**
 * Single-keystroke labeling map: "+" labels the focused tile particle,
 * "-" labels it non-particle, space skips to the next tile.
 */

export type KeyAction =
  | { kind: "label"; label: "particle" | "non_particle" }
  | { kind: "skip" }
  | { kind: "move"; delta: number }
  | null;

export function actionForKey(key: string): KeyAction {
  switch (key) {
    case "+":
    case "p":
      return { kind: "label", label: "particle" };
    case "-":
    case "n":
      return { kind: "label", label: "non_particle" };
    case " ":
      return { kind: "skip" };
    case "ArrowLeft":
      return { kind: "move", delta: -1 };
    case "ArrowRight":
      return { kind: "move", delta: 1 };
    default:
      return null;
  }
}
