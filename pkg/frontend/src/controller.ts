/**
 * Session state machine: loads API payloads into the view model, applies
 * user decisions optimistically, and rolls them back when the API refuses.
 */

import type { Action, ApiClient, Report, Scope } from "./api.js";
import type { DiffRow, ElementGroup, ViewModel } from "./model.js";
import { buildViewModel, markPending, markResolved, pendingRows } from "./model.js";
import { renderApp, renderBanner } from "./render.js";

export class ReviewController {
  private vm: ViewModel = { pending: 0, groups: [] };
  private reports: Report[] = [];

  constructor(
    private readonly client: ApiClient,
    private readonly root: HTMLElement,
  ) {}

  async start(): Promise<void> {
    await this.reload();
  }

  async reload(): Promise<void> {
    try {
      const [groups, reports] = await Promise.all([
        this.client.fetchGroups(),
        this.client.fetchReports(),
      ]);
      this.vm = buildViewModel(groups);
      this.reports = reports;
      this.paint();
    } catch (err) {
      const message = err instanceof Error ? err.message : String(err);
      this.root.replaceChildren(
        renderBanner(`Cannot reach the review API: ${message}`, () => void this.reload()),
      );
    }
  }

  private paint(): void {
    this.root.replaceChildren(
      renderApp(this.vm, this.reports, {
        onDecideRow: (row, action, scope) => void this.decide([row], action, scope),
        onDecideGroup: (group: ElementGroup, action, scope) =>
          void this.decide(pendingRows(group), action, scope),
      }),
    );
  }

  private async decide(rows: DiffRow[], action: Action, scope: Scope): Promise<void> {
    const taken = rows.filter((row) => row.status === "pending" && !row.busy);
    if (taken.length === 0) return;
    for (const row of taken) {
      row.busy = true;
      markResolved(row, action); // optimistic; rolled back on failure
    }
    this.paint();

    let failed = false;
    for (const row of taken) {
      // Sequential on purpose: decisions are serialized by the suite lock.
      try {
        const result = await this.client.submitDecision(row.signature, action, scope);
        row.busy = false;
        this.vm.pending = result.pending;
      } catch (err) {
        failed = true;
        markPending(row, err instanceof Error ? err.message : String(err));
      }
    }
    if (failed) {
      this.paint();
    } else {
      await this.reload();
    }
  }
}
