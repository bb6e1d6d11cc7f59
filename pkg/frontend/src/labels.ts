// The closed inventory of word-internal relation labels, with the gloss shown
// as picker tooltip and the keyboard shortcut (1-9, 0, -) for fast labeling.

export interface LabelInfo {
  name: string;
  gloss: string;
  key: string;
}

export const LABELS: readonly LabelInfo[] = [
  { name: "root", gloss: "word root", key: "1" },
  { name: "subj", gloss: "subject", key: "2" },
  { name: "obj", gloss: "object", key: "3" },
  { name: "att", gloss: "attribute modifier", key: "4" },
  { name: "adv", gloss: "adverbial modifier", key: "5" },
  { name: "cmp", gloss: "complement modifier", key: "6" },
  { name: "coo", gloss: "coordination", key: "7" },
  { name: "pobj", gloss: "preposition object", key: "8" },
  { name: "adjct", gloss: "adjunct", key: "9" },
  { name: "frag", gloss: "fragment, no semantic composition", key: "0" },
  { name: "repet", gloss: "repetition", key: "-" },
] as const;

export const LABEL_NAMES: readonly string[] = LABELS.map((l) => l.name);

export function labelByKey(key: string): LabelInfo | undefined {
  return LABELS.find((l) => l.key === key);
}

/** Labels offered for an arc: `root` exactly when the head is the virtual
 * root node, never otherwise. */
export function allowedLabels(head: number): readonly LabelInfo[] {
  return head === 0 ? LABELS.filter((l) => l.name === "root")
    : LABELS.filter((l) => l.name !== "root");
}
