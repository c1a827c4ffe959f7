/**
 * Typed client for the agsdiff review API. All traffic goes through the
 * four /api/* endpoints; the UI has no other backend.
 */

export interface ElementSummary {
  handle: string;
  type: string;
  attributes: Record<string, string>;
  attribute_count: number;
}

export interface AttributeChange {
  key: string;
  expected: string | null;
  actual: string | null;
}

export interface PairDiff {
  handle: string;
  actual_handle: string;
  element: ElementSummary;
  changes: AttributeChange[];
}

export interface Metrics {
  expected_elements: number;
  actual_elements: number;
  deleted: number;
  created: number;
  maintained: number;
  duration_ms: number;
}

export type ReportStatus = "ok" | "differences" | "golden-master-created";

export interface Report {
  test_id: string;
  step_name: string;
  status: ReportStatus;
  strategy: string;
  deleted: ElementSummary[];
  created: ElementSummary[];
  attribute_diffs: PairDiff[];
  metrics: Metrics;
}

export interface Signature {
  identity: [string, string][];
  key: string;
  expected: string | null;
  actual: string | null;
}

export interface Occurrence {
  test_id: string;
  step_name: string;
  handle: string;
  actual_handle: string;
}

export interface ChangeGroup {
  index: number;
  signature: Signature;
  count: number;
  occurrences: Occurrence[];
}

export interface GroupsPayload {
  groups: ChangeGroup[];
  pending: number;
}

export interface ElementDetail {
  handle: string;
  test_id: string;
  step_name: string;
  golden_master: Record<string, string> | null;
  actual: Record<string, string> | null;
}

export type Action = "accept" | "ignore";
export type Scope = "single" | "propagate";

export interface DecisionResult {
  action: Action;
  scope: Scope;
  applied: { test_id: string; step_name: string; handle: string; status: string }[];
  rules_added: string[];
  pending: number;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    detail: string,
  ) {
    super(detail);
    this.name = "ApiError";
  }
}

async function payloadOrThrow<T>(response: Response): Promise<T> {
  if (response.ok) {
    return (await response.json()) as T;
  }
  let detail = `${response.status} ${response.statusText}`;
  try {
    const body = (await response.json()) as { detail?: unknown };
    if (typeof body.detail === "string") detail = body.detail;
  } catch {
    // non-JSON error body; keep the status line
  }
  throw new ApiError(response.status, detail);
}

export class ApiClient {
  constructor(private readonly base = "") {}

  /** Stored reports; a single-report source is normalized to a list. */
  async fetchReports(): Promise<Report[]> {
    const response = await fetch(`${this.base}/api/report`);
    const doc = await payloadOrThrow<Report | { reports: Report[] }>(response);
    return "reports" in doc ? doc.reports : [doc];
  }

  async fetchGroups(): Promise<GroupsPayload> {
    const response = await fetch(`${this.base}/api/groups`);
    return payloadOrThrow(response);
  }

  async fetchElement(handle: string, testId?: string, stepName?: string): Promise<ElementDetail> {
    const query = new URLSearchParams();
    if (testId) query.set("test", testId);
    if (stepName) query.set("step", stepName);
    const suffix = query.size > 0 ? `?${query}` : "";
    const response = await fetch(`${this.base}/api/element/${encodeURIComponent(handle)}${suffix}`);
    return payloadOrThrow(response);
  }

  async submitDecision(signature: Signature, action: Action, scope: Scope): Promise<DecisionResult> {
    const response = await fetch(`${this.base}/api/decision`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ signature, action, scope }),
    });
    return payloadOrThrow(response);
  }
}
