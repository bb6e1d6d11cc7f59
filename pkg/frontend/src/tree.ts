// Partial-tree bookkeeping and the client-side legality rules, mirroring the
// server: single-headed, acyclic, single-root, `root` label only on the arc
// from the virtual root.  The client never enables a submit the server's
// validator would reject.

export interface Arc {
  head: number; // 0 = virtual root, 1..n = characters
  dep: number; // 1..n
  label: string;
}

export function headOf(arcs: readonly Arc[], dep: number): Arc | undefined {
  return arcs.find((a) => a.dep === dep);
}

export function hasRootArc(arcs: readonly Arc[]): boolean {
  return arcs.some((a) => a.head === 0);
}

/** Walking head links from `start` reaches `target`?  Used to refuse arcs
 * that would close a cycle: head -> ... -> dep means dep is an ancestor. */
export function reaches(arcs: readonly Arc[], start: number, target: number): boolean {
  let node = start;
  const seen = new Set<number>();
  while (node !== 0) {
    if (node === target) return true;
    if (seen.has(node)) return false;
    seen.add(node);
    const up = headOf(arcs, node);
    if (!up) return false;
    node = up.head;
  }
  return target === 0;
}

export type Refusal =
  | "self-arc"
  | "dependent-already-headed"
  | "second-root"
  | "cycle";

/** Why head -> dep cannot be drawn now; null when it can. */
export function refuseArc(arcs: readonly Arc[], head: number, dep: number): Refusal | null {
  if (head === dep) return "self-arc";
  if (headOf(arcs, dep)) return "dependent-already-headed";
  if (head === 0 && hasRootArc(arcs)) return "second-root";
  if (head !== 0 && reaches(arcs, head, dep)) return "cycle";
  return null;
}

/** Full-tree check used to gate submission; mirrors the service rules. */
export function treeViolations(n: number, arcs: readonly Arc[]): string[] {
  const out: string[] = [];
  const heads = new Map<number, Arc>();
  for (const arc of arcs) {
    if (arc.dep < 1 || arc.dep > n || arc.head < 0 || arc.head > n) {
      out.push("out-of-range");
      return out;
    }
    if (heads.has(arc.dep)) out.push("multi-headed");
    heads.set(arc.dep, arc);
  }
  if (heads.size < n) out.push("incomplete");
  const roots = arcs.filter((a) => a.head === 0);
  if (roots.length === 0) out.push("no-root");
  if (roots.length > 1) out.push("multi-root");
  for (const arc of arcs) {
    if ((arc.head === 0) !== (arc.label === "root")) {
      out.push("root-label-misuse");
      break;
    }
  }
  if (heads.size === n && roots.length === 1) {
    for (let node = 1; node <= n; node++) {
      const seen = new Set<number>();
      let cur = node;
      let ok = false;
      while (true) {
        if (cur === 0) {
          ok = true;
          break;
        }
        if (seen.has(cur)) break;
        seen.add(cur);
        const up = heads.get(cur);
        if (!up) break;
        cur = up.head;
      }
      if (!ok) {
        out.push("cycle");
        break;
      }
    }
  }
  return out;
}

export interface Submission {
  heads: number[];
  labels: string[];
}

/** Head/label arrays in character order; only valid on complete trees. */
export function toSubmission(n: number, arcs: readonly Arc[]): Submission {
  const heads = new Array<number>(n).fill(-1);
  const labels = new Array<string>(n).fill("");
  for (const arc of arcs) {
    heads[arc.dep - 1] = arc.head;
    labels[arc.dep - 1] = arc.label;
  }
  return { heads, labels };
}
