// Canvas state machine for one annotation task.  All transitions are pure:
// they take a state and return the next one, so rendering stays a function of
// state and the fuzz tests can drive the machine directly.

import { allowedLabels } from "./labels.js";
import { Arc, refuseArc, headOf, toSubmission, treeViolations, Submission } from "./tree.js";

export interface TaskInfo {
  task_id: string;
  surface: string;
  pos_hints: string[];
  example_sentences: string[];
  state: string;
}

export interface CanvasState {
  task: TaskInfo;
  arcs: readonly Arc[];
  /** First click: the chosen head (0 = the `$` virtual-root node). */
  pendingHead: number | null;
  /** Second click: the chosen modifier, now awaiting a label. */
  pendingDep: number | null;
  multiStructure: boolean;
  notice: string | null;
}

export function initialState(task: TaskInfo): CanvasState {
  return {
    task,
    arcs: [],
    pendingHead: null,
    pendingDep: null,
    multiStructure: false,
    notice: null,
  };
}

export function charCount(state: CanvasState): number {
  return Array.from(state.task.surface).length;
}

/** Characters still waiting for a head: exactly the red-circled ones. */
export function remaining(state: CanvasState): number[] {
  const n = charCount(state);
  const out: number[] = [];
  for (let i = 1; i <= n; i++) {
    if (!headOf(state.arcs, i)) out.push(i);
  }
  return out;
}

export function clickNode(state: CanvasState, index: number): CanvasState {
  const n = charCount(state);
  if (index < 0 || index > n) return { ...state, notice: "no such node" };
  if (state.pendingHead === null) {
    return { ...state, pendingHead: index, pendingDep: null, notice: null };
  }
  if (state.pendingDep !== null) {
    // label picker open; a node click restarts head selection
    return { ...state, pendingHead: index, pendingDep: null, notice: null };
  }
  if (index === state.pendingHead) {
    return { ...state, pendingHead: null, notice: null };
  }
  if (index === 0) {
    return { ...state, pendingHead: 0, pendingDep: null, notice: null };
  }
  const refusal = refuseArc(state.arcs, state.pendingHead, index);
  if (refusal === "dependent-already-headed") {
    return { ...state, notice: "that character already has a head (right-click it to undo)" };
  }
  if (refusal === "second-root") {
    return { ...state, pendingHead: null, notice: "the tree already has a root arc" };
  }
  if (refusal === "cycle") {
    return { ...state, pendingHead: null, notice: "that arc would close a cycle" };
  }
  if (refusal === "self-arc") {
    return { ...state, notice: "a character cannot head itself" };
  }
  return { ...state, pendingDep: index, notice: null };
}

export function chooseLabel(state: CanvasState, label: string): CanvasState {
  if (state.pendingHead === null || state.pendingDep === null) {
    return { ...state, notice: "click a head and a modifier first" };
  }
  if (!allowedLabels(state.pendingHead).some((l) => l.name === label)) {
    return { ...state, notice: `label ${label} is not allowed on this arc` };
  }
  const refusal = refuseArc(state.arcs, state.pendingHead, state.pendingDep);
  if (refusal) {
    return { ...state, pendingHead: null, pendingDep: null, notice: refusal };
  }
  const arc: Arc = { head: state.pendingHead, dep: state.pendingDep, label };
  return {
    ...state,
    arcs: [...state.arcs, arc],
    pendingHead: null,
    pendingDep: null,
    notice: null,
  };
}

/** Right-click on a modifier cancels its arc and restores the red circle. */
export function undoArc(state: CanvasState, dep: number): CanvasState {
  if (!headOf(state.arcs, dep)) {
    return { ...state, notice: null }; // no-op on circled characters
  }
  return {
    ...state,
    arcs: state.arcs.filter((a) => a.dep !== dep),
    pendingHead: null,
    pendingDep: null,
    notice: null,
  };
}

export function toggleMultiStructure(state: CanvasState): CanvasState {
  return { ...state, multiStructure: !state.multiStructure };
}

export function violations(state: CanvasState): string[] {
  return treeViolations(charCount(state), state.arcs);
}

/** Submit is available only for a complete, legal tree. */
export function canSubmit(state: CanvasState): boolean {
  return remaining(state).length === 0 && violations(state).length === 0;
}

export function submission(state: CanvasState): Submission {
  if (!canSubmit(state)) {
    throw new Error("submit attempted on an incomplete or illegal tree");
  }
  return toSubmission(charCount(state), state.arcs);
}
