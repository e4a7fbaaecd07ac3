// Hand-rolled SVG line chart of escalation risk per stage. One circle per
// stage so the rendered point count always equals the ticket's stage count.

import type { TimelinePoint } from "./api.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export interface ChartOptions {
  width?: number;
  height?: number;
  padding?: number;
}

export function renderTimelineChart(
  points: TimelinePoint[],
  options: ChartOptions = {},
): SVGSVGElement {
  const width = options.width ?? 560;
  const height = options.height ?? 180;
  const pad = options.padding ?? 24;

  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
  svg.setAttribute("class", "er-timeline");
  svg.setAttribute("role", "img");

  const innerW = width - 2 * pad;
  const innerH = height - 2 * pad;
  const maxStage = Math.max(1, points.length);
  const x = (stage: number) =>
    maxStage === 1 ? pad + innerW / 2 : pad + ((stage - 1) / (maxStage - 1)) * innerW;
  const y = (er: number) => pad + (1 - er) * innerH;

  // axis lines and the 50% threshold guide
  for (const [y1, cls] of [
    [y(0), "axis"],
    [y(0.5), "threshold"],
    [y(1), "axis"],
  ] as const) {
    const line = document.createElementNS(SVG_NS, "line");
    line.setAttribute("x1", String(pad));
    line.setAttribute("x2", String(width - pad));
    line.setAttribute("y1", String(y1));
    line.setAttribute("y2", String(y1));
    line.setAttribute("class", cls);
    svg.appendChild(line);
  }

  if (points.length > 1) {
    const path = document.createElementNS(SVG_NS, "path");
    const d = points
      .map((p, i) => `${i === 0 ? "M" : "L"}${x(p.stage).toFixed(1)},${y(p.er).toFixed(1)}`)
      .join(" ");
    path.setAttribute("d", d);
    path.setAttribute("class", "er-line");
    path.setAttribute("fill", "none");
    svg.appendChild(path);
  }

  for (const p of points) {
    const dot = document.createElementNS(SVG_NS, "circle");
    dot.setAttribute("cx", x(p.stage).toFixed(1));
    dot.setAttribute("cy", y(p.er).toFixed(1));
    dot.setAttribute("r", "3");
    dot.setAttribute("class", "er-point");
    dot.setAttribute("data-stage", String(p.stage));
    dot.setAttribute("data-er", String(p.er));
    const title = document.createElementNS(SVG_NS, "title");
    title.textContent = `stage ${p.stage}: ${Math.round(p.er * 100)}%`;
    dot.appendChild(title);
    svg.appendChild(dot);
  }
  return svg;
}
