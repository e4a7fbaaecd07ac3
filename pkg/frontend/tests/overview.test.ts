import { beforeEach, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { OverviewView } from "../src/overview.js";
import { FakeTriageServer } from "./fake_server.js";

function seededServer(): FakeTriageServer {
  // ids deliberately out of ER order so rendering order proves API order
  return new FakeTriageServer([
    { pmr_id: "P000003-C00001", customer_id: "C00001", er: 0.9 },
    { pmr_id: "P000001-C00002", customer_id: "C00002", er: 0.5 },
    { pmr_id: "P000002-C00003", customer_id: "C00003", er: 0.1 },
  ]);
}

function makeView(server: FakeTriageServer) {
  const api = new ApiClient("", server.fetch as typeof fetch);
  const errors: unknown[] = [];
  const opened: string[] = [];
  const view = new OverviewView(api, {
    openDetail: (id) => opened.push(id),
    onError: (e) => errors.push(e),
  });
  const root = document.createElement("div");
  document.body.textContent = "";
  document.body.appendChild(root);
  return { view, root, errors, opened };
}

function renderedIds(root: HTMLElement): string[] {
  return [...root.querySelectorAll("tbody tr")].map((tr) => (tr as HTMLElement).dataset.pmrId!);
}

describe("overview", () => {
  let server: FakeTriageServer;

  beforeEach(() => {
    server = seededServer();
  });

  it("renders rows in the exact order the API returned", async () => {
    const { view, root, errors } = makeView(server);
    await view.mount(root);
    expect(errors).toEqual([]);
    expect(renderedIds(root)).toEqual([
      "P000003-C00001",
      "P000001-C00002",
      "P000002-C00003",
    ]);
  });

  it("shows er as integer percent and cer with a sign glyph", async () => {
    server.rescore({ "P000001-C00002": 0.62 });
    const { view, root } = makeView(server);
    await view.mount(root);
    const row = root.querySelector('tr[data-pmr-id="P000001-C00002"]')!;
    expect(row.querySelector("td.er")!.textContent).toBe("62%");
    expect(row.querySelector("td.cer")!.textContent).toBe("+12");
  });

  it("shows an empty-state message when there are no tickets", async () => {
    const empty = new FakeTriageServer([]);
    const { view, root } = makeView(empty);
    await view.mount(root);
    expect(root.querySelector(".empty-state")!.textContent).toContain("No active tickets");
  });

  it("column sort toggles re-query with the sort param", async () => {
    const { view, root } = makeView(server);
    await view.mount(root);
    server.requests.length = 0;
    const merHeader = [...root.querySelectorAll("th.sortable")].find(
      (th) => th.textContent === "MER",
    )! as HTMLElement;
    merHeader.click();
    await new Promise((r) => setTimeout(r, 0));
    const listCalls = server.requests.filter((r) => r.path === "/api/pmrs");
    expect(listCalls.length).toBeGreaterThan(0);
    expect(view.sort).toBe("mer");
  });

  it("follow click re-renders from the API and pins the row in the sidebar", async () => {
    const { view, root } = makeView(server);
    await view.mount(root);
    expect(root.querySelector(".sidebar .empty")).not.toBeNull();

    const row = root.querySelector('tr[data-pmr-id="P000001-C00002"]')!;
    (row.querySelector("button.follow-toggle") as HTMLElement).click();
    await new Promise((r) => setTimeout(r, 0));
    await new Promise((r) => setTimeout(r, 0));

    const sidebarIds = [...document.querySelectorAll(".followed-item .pmr-link")].map(
      (a) => a.textContent,
    );
    expect(sidebarIds).toEqual(["P000001-C00002"]);
    expect(server.tickets.get("P000001-C00002")!.followed).toBe(true);
  });

  it("flags stale rows by last_scored age", async () => {
    const old = new Date(Date.now() - 3 * 3600 * 1000).toISOString();
    const stale = new FakeTriageServer([
      { pmr_id: "P1-C1", customer_id: "C1", er: 0.4, last_scored: old },
    ]);
    const { view, root } = makeView(stale);
    await view.mount(root);
    expect(root.querySelector(".stale-flag")!.textContent).toContain("stale");
  });

  it("raises the connectivity callback when the API is down", async () => {
    const deadFetch: typeof fetch = async () => {
      throw new TypeError("fetch failed");
    };
    const api = new ApiClient("", deadFetch);
    const errors: unknown[] = [];
    const view = new OverviewView(api, {
      openDetail: () => undefined,
      onError: (e) => errors.push(e),
    });
    const root = document.createElement("div");
    await view.mount(root);
    expect(errors.length).toBe(1);
  });
});
