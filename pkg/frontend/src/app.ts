// Hash-routed single-page shell: "#/" is the overview, "#/pmr/<id>" the
// in-depth view. API failures raise a connectivity banner instead of
// blanking the page.

import { ApiClient } from "./api.js";
import { DetailView } from "./detail.js";
import { OverviewView } from "./overview.js";

export class App {
  readonly overview: OverviewView;
  readonly detail: DetailView;
  private banner: HTMLElement;
  private content: HTMLElement;

  constructor(
    root: HTMLElement,
    api: ApiClient,
    private win: Pick<Window, "addEventListener" | "location"> = window,
  ) {
    this.banner = document.createElement("div");
    this.banner.className = "connectivity-banner";
    this.banner.hidden = true;
    this.content = document.createElement("main");
    this.content.className = "content";
    root.appendChild(this.banner);
    root.appendChild(this.content);

    const callbacks = {
      openDetail: (pmrId: string) => {
        this.win.location.hash = `#/pmr/${pmrId}`;
        void this.route();
      },
      backToOverview: () => {
        this.win.location.hash = "#/";
        void this.route();
      },
      onError: (err: unknown) => this.showBanner(err),
    };
    this.overview = new OverviewView(api, callbacks);
    this.detail = new DetailView(api, callbacks);
    this.win.addEventListener("hashchange", () => void this.route());
  }

  showBanner(err: unknown): void {
    const message = err instanceof Error ? err.message : String(err);
    this.banner.textContent = `Cannot reach the triage service: ${message}`;
    this.banner.hidden = false;
  }

  hideBanner(): void {
    this.banner.hidden = true;
  }

  async route(): Promise<void> {
    this.hideBanner();
    const hash = this.win.location.hash || "#/";
    const match = /^#\/pmr\/(.+)$/.exec(hash);
    if (match) {
      await this.detail.mount(this.content, decodeURIComponent(match[1]));
    } else {
      await this.overview.mount(this.content);
    }
  }
}

export function bootstrap(rootId = "app", baseUrl = ""): App {
  const root = document.getElementById(rootId);
  if (!root) throw new Error(`missing #${rootId} element`);
  const app = new App(root, new ApiClient(baseUrl));
  void app.route();
  return app;
}
