// Pure renderers: DOM output is a function of the canvas state alone.
// Handlers are injected so the same renderer serves the app and the tests.

import { allowedLabels } from "./labels.js";
import { headOf, Submission } from "./tree.js";
import { CanvasState, canSubmit, remaining } from "./state.js";

export interface Handlers {
  onNodeClick(index: number): void;
  onNodeUndo(index: number): void;
  onLabel(label: string): void;
  onToggleMulti(): void;
  onSubmit(): void;
}

function el(doc: Document, tag: string, className?: string, text?: string): HTMLElement {
  const node = doc.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function nodeButton(doc: Document, state: CanvasState, handlers: Handlers,
  index: number, text: string): HTMLElement {
  const circled = index > 0 && !headOf(state.arcs, index);
  const classes = ["node"];
  if (circled) classes.push("circled");
  if (state.pendingHead === index) classes.push("pending-head");
  if (state.pendingDep === index) classes.push("pending-dep");
  const btn = el(doc, "button", classes.join(" "), text);
  btn.setAttribute("data-node", String(index));
  btn.addEventListener("click", () => handlers.onNodeClick(index));
  btn.addEventListener("contextmenu", (event) => {
    event.preventDefault();
    if (index > 0) handlers.onNodeUndo(index);
  });
  return btn;
}

/** The annotation canvas: `$` plus one button per character, the arcs drawn
 * so far, the label picker while an arc awaits its label, and the submit
 * controls.  Red circles mark exactly the characters without a head. */
export function renderCanvas(doc: Document, state: CanvasState,
  handlers: Handlers): HTMLElement {
  const root = el(doc, "div", "canvas");
  const chars = Array.from(state.task.surface);

  const header = el(doc, "div", "task-header");
  header.appendChild(el(doc, "span", "surface", state.task.surface));
  if (state.task.pos_hints.length) {
    header.appendChild(el(doc, "span", "pos-hints",
      "POS: " + state.task.pos_hints.join(", ")));
  }
  for (const example of state.task.example_sentences) {
    header.appendChild(el(doc, "div", "example", example));
  }
  root.appendChild(header);

  const row = el(doc, "div", "nodes");
  row.appendChild(nodeButton(doc, state, handlers, 0, "$"));
  chars.forEach((c, i) => row.appendChild(nodeButton(doc, state, handlers, i + 1, c)));
  root.appendChild(row);

  const arcsBox = el(doc, "ul", "arcs");
  for (const arc of state.arcs) {
    const item = el(doc, "li", "arc",
      `${arc.head === 0 ? "$" : chars[arc.head - 1]} → ${chars[arc.dep - 1]} [${arc.label}]`);
    item.setAttribute("data-dep", String(arc.dep));
    item.addEventListener("contextmenu", (event) => {
      event.preventDefault();
      handlers.onNodeUndo(arc.dep);
    });
    arcsBox.appendChild(item);
  }
  root.appendChild(arcsBox);

  if (state.pendingHead !== null && state.pendingDep !== null) {
    const picker = el(doc, "div", "label-picker");
    for (const info of allowedLabels(state.pendingHead)) {
      const btn = el(doc, "button", "label", info.name);
      btn.title = info.gloss;
      btn.setAttribute("data-label", info.name);
      btn.setAttribute("data-key", info.key);
      btn.addEventListener("click", () => handlers.onLabel(info.name));
      picker.appendChild(btn);
    }
    root.appendChild(picker);
  }

  if (state.notice) {
    root.appendChild(el(doc, "div", "notice", state.notice));
  }

  const controls = el(doc, "div", "controls");
  const multi = el(doc, "label", "multi");
  const checkbox = doc.createElement("input");
  checkbox.type = "checkbox";
  checkbox.checked = state.multiStructure;
  checkbox.addEventListener("change", () => handlers.onToggleMulti());
  multi.appendChild(checkbox);
  multi.appendChild(doc.createTextNode(" this word has another internal structure"));
  controls.appendChild(multi);

  const submit = el(doc, "button", "submit", "submit");
  submit.setAttribute("data-role", "submit");
  if (!canSubmit(state)) {
    submit.setAttribute("disabled", "disabled");
  }
  submit.addEventListener("click", () => {
    if (canSubmit(state)) handlers.onSubmit();
  });
  controls.appendChild(submit);
  const left = remaining(state).length;
  controls.appendChild(el(doc, "span", "status",
    left ? `${left} character(s) still circled` : "tree complete"));
  root.appendChild(controls);
  return root;
}

export interface AdjudicationHandlers {
  onAdopt(which: "a" | "b"): void;
}

/** Side-by-side view of two inconsistent submissions; arcs that differ from
 * the other annotator's choice are flagged. */
export function renderAdjudication(doc: Document, surface: string,
  a: Submission, b: Submission,
  handlers: AdjudicationHandlers): HTMLElement {
  const root = el(doc, "div", "adjudication");
  const chars = Array.from(surface);
  const sides: ["a" | "b", Submission, Submission][] =
    [["a", a, b], ["b", b, a]];
  for (const [name, own, other] of sides) {
    const box = el(doc, "div", `submission submission-${name}`);
    box.appendChild(el(doc, "h3", undefined, `annotator ${name}`));
    const list = el(doc, "ul", "arcs");
    own.heads.forEach((head, i) => {
      const differs = other.heads[i] !== head || other.labels[i] !== own.labels[i];
      const item = el(doc, "li", differs ? "arc differs" : "arc",
        `${head === 0 ? "$" : chars[head - 1]} → ${chars[i]} [${own.labels[i]}]`);
      list.appendChild(item);
    });
    box.appendChild(list);
    const adopt = el(doc, "button", "adopt", `adopt ${name}`);
    adopt.setAttribute("data-adopt", name);
    adopt.addEventListener("click", () => handlers.onAdopt(name));
    box.appendChild(adopt);
    root.appendChild(box);
  }
  return root;
}

/** Correction view: the adjudicated answer with resubmit / complain. */
export function renderCorrection(doc: Document, surface: string,
  final: Submission,
  handlers: { onResubmit(): void; onComplain(): void }): HTMLElement {
  const root = el(doc, "div", "correction");
  const chars = Array.from(surface);
  root.appendChild(el(doc, "p", undefined,
    "your submission differed from the final answer; resubmit it or complain"));
  const list = el(doc, "ul", "arcs");
  final.heads.forEach((head, i) => {
    list.appendChild(el(doc, "li", "arc",
      `${head === 0 ? "$" : chars[head - 1]} → ${chars[i]} [${final.labels[i]}]`));
  });
  root.appendChild(list);
  const resubmit = el(doc, "button", "resubmit", "resubmit final answer");
  resubmit.setAttribute("data-role", "resubmit");
  resubmit.addEventListener("click", handlers.onResubmit);
  root.appendChild(resubmit);
  const complain = el(doc, "button", "complain", "complain");
  complain.setAttribute("data-role", "complain");
  complain.addEventListener("click", handlers.onComplain);
  root.appendChild(complain);
  return root;
}
