// Overview: every tracked ticket ranked by the selected column, with the
// followed tickets pinned in a sidebar. All mutations round-trip through
// the API and re-render from fresh responses; nothing is updated
// optimistically.

import { ApiClient, PmrSummary, SortKey } from "./api.js";
import { cerBadge, erPercent, merText, scoredAgeMinutes, staleLabel } from "./format.js";

export interface OverviewCallbacks {
  openDetail(pmrId: string): void;
  onError(err: unknown): void;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export class OverviewView {
  sort: SortKey = "er";
  private root: HTMLElement | null = null;

  constructor(
    private api: ApiClient,
    private callbacks: OverviewCallbacks,
  ) {}

  mount(root: HTMLElement): Promise<void> {
    this.root = root;
    return this.refresh();
  }

  async refresh(): Promise<void> {
    if (!this.root) return;
    let rows: PmrSummary[];
    let followed: PmrSummary[];
    try {
      rows = await this.api.listPmrs(this.sort, false);
      followed = await this.api.listPmrs("er", true);
    } catch (err) {
      this.callbacks.onError(err);
      return;
    }
    this.render(rows, followed);
  }

  private async setSort(sort: SortKey): Promise<void> {
    this.sort = sort;
    await this.refresh();
  }

  private async toggleFollow(row: PmrSummary): Promise<void> {
    try {
      await this.api.setFollow(row.pmr_id, !row.followed);
    } catch (err) {
      this.callbacks.onError(err);
      return;
    }
    await this.refresh();
  }

  private render(rows: PmrSummary[], followed: PmrSummary[]): void {
    const root = this.root!;
    root.textContent = "";

    const layout = el("div", "overview-layout");
    const sidebar = el("aside", "sidebar");
    sidebar.appendChild(el("h2", undefined, "Followed"));
    if (followed.length === 0) {
      sidebar.appendChild(el("p", "empty", "No followed tickets."));
    } else {
      const list = el("ul", "followed-list");
      for (const row of followed) {
        const item = el("li", "followed-item");
        const link = el("a", "pmr-link", row.pmr_id);
        link.setAttribute("href", `#/pmr/${row.pmr_id}`);
        item.appendChild(link);
        item.appendChild(el("span", "er", erPercent(row.er)));
        if (row.next_action) item.appendChild(el("span", "next-action", row.next_action));
        list.appendChild(item);
      }
      sidebar.appendChild(list);
    }

    const main = el("section", "ticket-table");
    if (rows.length === 0) {
      main.appendChild(el("p", "empty-state", "No active tickets to triage."));
    } else {
      const table = el("table", "pmr-table");
      const thead = el("thead");
      const headRow = el("tr");
      const columns: Array<[string, SortKey | null]> = [
        ["Ticket", null],
        ["Customer", null],
        ["ER", "er"],
        ["CER", "cer"],
        ["MER", "mer"],
        ["Next action", null],
        ["Follow", null],
      ];
      for (const [label, sortKey] of columns) {
        const th = el("th", undefined, label);
        if (sortKey) {
          th.classList.add("sortable");
          if (sortKey === this.sort) th.classList.add("sorted");
          th.addEventListener("click", () => void this.setSort(sortKey));
        }
        headRow.appendChild(th);
      }
      thead.appendChild(headRow);
      table.appendChild(thead);

      const tbody = el("tbody");
      for (const row of rows) {
        const tr = el("tr", "pmr-row");
        tr.dataset.pmrId = row.pmr_id;

        const idCell = el("td");
        const link = el("a", "pmr-link", row.pmr_id);
        link.setAttribute("href", `#/pmr/${row.pmr_id}`);
        link.addEventListener("click", (ev) => {
          ev.preventDefault();
          this.callbacks.openDetail(row.pmr_id);
        });
        idCell.appendChild(link);
        const stale = staleLabel(scoredAgeMinutes(row.last_scored));
        if (stale) idCell.appendChild(el("span", "stale-flag", stale));
        tr.appendChild(idCell);

        tr.appendChild(el("td", "customer", row.customer_id ?? ""));
        tr.appendChild(el("td", "er", erPercent(row.er)));
        tr.appendChild(el("td", "cer", cerBadge(row.cer)));
        tr.appendChild(el("td", "mer", merText(row.mer)));
        tr.appendChild(el("td", "next-action", row.next_action ?? ""));

        const followCell = el("td");
        const btn = el("button", "follow-toggle", row.followed ? "★" : "☆");
        btn.setAttribute("aria-pressed", String(row.followed));
        btn.addEventListener("click", () => void this.toggleFollow(row));
        followCell.appendChild(btn);
        tr.appendChild(followCell);

        tbody.appendChild(tr);
      }
      table.appendChild(tbody);
      main.appendChild(table);
    }

    layout.appendChild(main);
    layout.appendChild(sidebar);
    root.appendChild(layout);
  }
}
