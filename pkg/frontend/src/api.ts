// Thin typed client for the annotation service.  Errors carry the HTTP
// status and the server's violation list so views can highlight them.

import { Submission } from "./tree.js";
import { TaskInfo } from "./state.js";

export class ApiError extends Error {
  status: number;
  violations: string[];

  constructor(status: number, message: string, violations: string[] = []) {
    super(message);
    this.status = status;
    this.violations = violations;
  }
}

export interface TaskSnapshot extends TaskInfo {
  assigned: number;
  pending_correction: string[];
  final?: Submission;
  submissions?: { annotator: string; tree: Submission }[];
}

async function request<T>(base: string, method: string, path: string,
  body?: unknown): Promise<T> {
  const resp = await fetch(base + path, {
    method,
    headers: body !== undefined ? { "Content-Type": "application/json" } : {},
    body: body !== undefined ? JSON.stringify(body) : undefined,
  });
  const text = await resp.text();
  if (!resp.ok) {
    let message = text;
    let violations: string[] = [];
    try {
      const parsed = JSON.parse(text);
      message = parsed.error ?? text;
      violations = parsed.violations ?? [];
    } catch {
      // non-JSON error body: keep raw text
    }
    throw new ApiError(resp.status, message, violations);
  }
  const ctype = resp.headers.get("Content-Type") ?? "";
  return (ctype.includes("json") ? JSON.parse(text) : text) as T;
}

export class ServiceClient {
  constructor(private base: string) {}

  createProject(projectId?: string, seed = 0): Promise<{ project: string }> {
    return request(this.base, "POST", "/projects",
      { project_id: projectId, seed });
  }

  importTasks(project: string, words: (string | object)[]): Promise<{ imported: number }> {
    return request(this.base, "POST", `/projects/${project}/tasks:import`, { words });
  }

  nextTask(project: string, annotator: string): Promise<TaskSnapshot> {
    return request(this.base, "GET",
      `/projects/${project}/next-task?annotator=${encodeURIComponent(annotator)}`);
  }

  getTask(taskId: string): Promise<TaskSnapshot> {
    return request(this.base, "GET", `/tasks/${taskId}`);
  }

  submit(taskId: string, annotator: string, tree: Submission,
    multiStructure = false): Promise<{ state: string }> {
    return request(this.base, "POST", `/tasks/${taskId}/submit`,
      { annotator, ...tree, multi_structure: multiStructure });
  }

  adjudicate(taskId: string, expert: string, tree: Submission): Promise<{ state: string }> {
    return request(this.base, "POST", `/tasks/${taskId}/adjudicate`,
      { expert, ...tree });
  }

  complain(taskId: string, annotator: string): Promise<{ state: string }> {
    return request(this.base, "POST", `/tasks/${taskId}/complain`, { annotator });
  }

  resolve(taskId: string, senior: string, tree: Submission): Promise<{ state: string }> {
    return request(this.base, "POST", `/tasks/${taskId}/resolve`,
      { senior, ...tree });
  }

  exportFinal(project: string): Promise<string> {
    return request(this.base, "GET", `/projects/${project}/export`);
  }

  stats(project: string): Promise<Record<string, unknown>> {
    return request(this.base, "GET", `/projects/${project}/stats`);
  }
}
