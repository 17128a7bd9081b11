/** Server-side SVG rendering of chart options. */

import * as echarts from "echarts";
import type { EChartsOption } from "echarts";

export interface RenderSize {
  width: number;
  height: number;
}

export const DEFAULT_SIZE: RenderSize = { width: 900, height: 600 };

export function renderSvg(option: EChartsOption, size: RenderSize = DEFAULT_SIZE): string {
  const chart = echarts.init(null, null, {
    renderer: "svg",
    ssr: true,
    width: size.width,
    height: size.height,
  });
  try {
    chart.setOption(option);
    return canonicalizeIds(chart.renderToSVGString());
  } finally {
    chart.dispose();
  }
}

/**
 * echarts numbers the hover-style classes and clipPath ids it embeds in the
 * SVG with a process-global counter, so two renders of the same option differ
 * byte-wise. Renaming them in order of first appearance makes output depend
 * only on the option.
 */
function canonicalizeIds(svg: string): string {
  const renames = new Map<string, string>();
  const counters = { "cls-": 0, c: 0 };
  return svg.replace(/zr\d+-(cls-|c)(\d+)/g, (token, kind: "cls-" | "c") => {
    let name = renames.get(token);
    if (name === undefined) {
      name = (kind === "cls-" ? "cls-" : "clip-") + counters[kind]++;
      renames.set(token, name);
    }
    return name;
  });
}
