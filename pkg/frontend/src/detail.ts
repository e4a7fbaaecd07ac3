// In-depth view of one ticket: risk timeline, analyst inputs (MER, next
// action, comments), and the record history interleaved with comments by
// timestamp. Mutations re-render from a fresh API response.

import { ApiClient, ApiError, CommentEntry, HistoryEntry, PmrDetail } from "./api.js";
import { renderTimelineChart } from "./chart.js";
import { cerBadge, erPercent, merText, scoredAgeMinutes, staleLabel, validMer } from "./format.js";

export interface DetailCallbacks {
  backToOverview(): void;
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

type FeedItem =
  | { kind: "record"; ts: string; record: HistoryEntry }
  | { kind: "comment"; ts: string; comment: CommentEntry };

export function interleaveFeed(history: HistoryEntry[], comments: CommentEntry[]): FeedItem[] {
  const items: FeedItem[] = [
    ...history.map((record) => ({ kind: "record" as const, ts: record.timestamp, record })),
    ...comments.map((comment) => ({ kind: "comment" as const, ts: comment.ts, comment })),
  ];
  // Stable by construction: records keep seq order, comments keep insertion order.
  return items.sort((a, b) => (a.ts < b.ts ? -1 : a.ts > b.ts ? 1 : 0));
}

function describeRecord(r: HistoryEntry): string {
  switch (r.event) {
    case "open":
      return "ticket opened";
    case "close":
      return "ticket closed";
    case "message_in":
      return "message from customer";
    case "message_out":
      return `support replied${r.support_person_id ? ` (${r.support_person_id})` : ""}`;
    case "severity_change":
      return `severity ${r.sev_from} → ${r.sev_to}`;
    case "ownership_change":
      return `ownership moved to ${r.level}`;
    case "contact_added":
      return `support contact added${r.support_person_id ? ` (${r.support_person_id})` : ""}`;
    default:
      return r.event;
  }
}

export class DetailView {
  private root: HTMLElement | null = null;
  private pmrId = "";

  constructor(
    private api: ApiClient,
    private callbacks: DetailCallbacks,
  ) {}

  async mount(root: HTMLElement, pmrId: string): Promise<void> {
    this.root = root;
    this.pmrId = pmrId;
    await this.refresh();
  }

  async refresh(): Promise<void> {
    if (!this.root) return;
    let detail: PmrDetail;
    try {
      detail = await this.api.getPmr(this.pmrId);
    } catch (err) {
      if (err instanceof ApiError && err.status === 404) {
        this.renderNotFound();
        return;
      }
      this.callbacks.onError(err);
      return;
    }
    this.render(detail);
  }

  private renderNotFound(): void {
    const root = this.root!;
    root.textContent = "";
    const box = el("div", "not-found");
    box.appendChild(el("h2", undefined, "Ticket not found"));
    box.appendChild(el("p", undefined, `No ticket with id ${this.pmrId}.`));
    const back = el("button", "back", "Back to overview");
    back.addEventListener("click", () => this.callbacks.backToOverview());
    box.appendChild(back);
    root.appendChild(box);
  }

  private render(detail: PmrDetail): void {
    const root = this.root!;
    root.textContent = "";
    const page = el("div", "detail-page");

    // header
    const header = el("header", "detail-header");
    const back = el("button", "back", "← Overview");
    back.addEventListener("click", () => this.callbacks.backToOverview());
    header.appendChild(back);
    header.appendChild(el("h2", undefined, detail.pmr_id));
    if (detail.customer_id) header.appendChild(el("span", "customer", detail.customer_id));
    header.appendChild(el("span", "er-big", erPercent(detail.er)));
    header.appendChild(el("span", "cer-badge", cerBadge(detail.cer)));
    header.appendChild(el("span", "state", detail.open ? "open" : "closed"));
    const stale = staleLabel(scoredAgeMinutes(detail.last_scored));
    if (stale) header.appendChild(el("span", "stale-flag", stale));
    page.appendChild(header);

    // timeline chart
    const chartBox = el("section", "chart-box");
    chartBox.appendChild(el("h3", undefined, `Escalation risk over ${detail.timeline.length} stages`));
    chartBox.appendChild(renderTimelineChart(detail.timeline));
    page.appendChild(chartBox);

    // analyst inputs
    const inputs = el("section", "analyst-inputs");

    const merBox = el("div", "mer-box");
    merBox.appendChild(el("label", undefined, "Manual ER (0–100)"));
    const merInput = el("input", "mer-input");
    merInput.setAttribute("type", "number");
    merInput.setAttribute("min", "0");
    merInput.setAttribute("max", "100");
    merInput.value = detail.mer === null ? "" : String(detail.mer);
    const merSave = el("button", "mer-save", "Save");
    const merError = el("span", "mer-error", "");
    merSave.addEventListener("click", () => {
      const value = validMer(merInput.value);
      if (value === null) {
        merError.textContent = "MER must be an integer from 0 to 100.";
        return;
      }
      merError.textContent = "";
      void this.api
        .setMer(detail.pmr_id, value)
        .then(() => this.refresh())
        .catch((err) => this.callbacks.onError(err));
    });
    merBox.appendChild(merInput);
    merBox.appendChild(merSave);
    merBox.appendChild(merError);
    merBox.appendChild(el("span", "mer-current", `recorded: ${merText(detail.mer)}`));
    inputs.appendChild(merBox);

    const actionBox = el("div", "next-action-box");
    actionBox.appendChild(el("label", undefined, "Next action"));
    const actionInput = el("input", "next-action-input");
    actionInput.value = detail.next_action ?? "";
    const actionSave = el("button", "next-action-save", "Save");
    actionSave.addEventListener("click", () => {
      void this.api
        .setNextAction(detail.pmr_id, actionInput.value)
        .then(() => this.refresh())
        .catch((err) => this.callbacks.onError(err));
    });
    actionBox.appendChild(actionInput);
    actionBox.appendChild(actionSave);
    inputs.appendChild(actionBox);

    const followBtn = el(
      "button",
      "follow-toggle",
      detail.followed ? "★ Following" : "☆ Follow",
    );
    followBtn.addEventListener("click", () => {
      void this.api
        .setFollow(detail.pmr_id, !detail.followed)
        .then(() => this.refresh())
        .catch((err) => this.callbacks.onError(err));
    });
    inputs.appendChild(followBtn);
    page.appendChild(inputs);

    // comment composer
    const composer = el("section", "comment-composer");
    composer.appendChild(el("h3", undefined, "Add comment"));
    const author = el("input", "comment-author");
    author.setAttribute("placeholder", "your name");
    const text = el("textarea", "comment-text");
    const post = el("button", "comment-post", "Post");
    post.addEventListener("click", () => {
      if (!text.value.trim()) return;
      void this.api
        .addComment(detail.pmr_id, author.value || "analyst", text.value)
        .then(() => this.refresh())
        .catch((err) => this.callbacks.onError(err));
    });
    composer.appendChild(author);
    composer.appendChild(text);
    composer.appendChild(post);
    page.appendChild(composer);

    // history with comments woven in by timestamp
    const feed = el("section", "feed");
    feed.appendChild(el("h3", undefined, "History"));
    const list = el("ol", "feed-list");
    for (const item of interleaveFeed(detail.history, detail.comments)) {
      if (item.kind === "record") {
        const li = el("li", "feed-record");
        li.appendChild(el("time", undefined, item.ts));
        li.appendChild(el("span", "actor", item.record.actor));
        li.appendChild(el("span", "summary", describeRecord(item.record)));
        list.appendChild(li);
      } else {
        const li = el("li", "feed-comment");
        li.appendChild(el("time", undefined, item.ts));
        li.appendChild(el("span", "author", item.comment.author));
        li.appendChild(el("span", "text", item.comment.text));
        list.appendChild(li);
      }
    }
    feed.appendChild(list);
    page.appendChild(feed);

    // feature table
    const featureBox = el("section", "feature-box");
    featureBox.appendChild(el("h3", undefined, `Model features (stage ${detail.stage})`));
    const table = el("table", "feature-table");
    for (const [name, value] of Object.entries(detail.features)) {
      const tr = el("tr");
      tr.appendChild(el("td", "feature-name", name));
      tr.appendChild(el("td", "feature-value", String(value)));
      table.appendChild(tr);
    }
    featureBox.appendChild(table);
    page.appendChild(featureBox);

    root.appendChild(page);
  }
}
