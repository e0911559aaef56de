// Minimal SVG renderer for the exported GeoJSON (planar coordinates).
// Classification colors come from the level property; no server styling.

import type { FeatureCollection, MapFeature } from "../types.js";

const LEVEL_COLORS: Record<string, string> = {
  baja: "#2e7d32",
  media: "#f9a825",
  alta: "#c62828",
  menor: "#2e7d32",
  moderado: "#9e9d24",
  severo: "#f9a825",
  total: "#ef6c00",
  colapso: "#c62828",
  "no-data": "#9e9e9e",
};

export function levelColor(level: string): string {
  return LEVEL_COLORS[level] ?? "#607d8b";
}

interface Bounds {
  minX: number; minY: number; maxX: number; maxY: number;
}

function* positions(geometry: { type: string; coordinates: unknown }): Iterable<number[]> {
  const coords = geometry.coordinates;
  if (geometry.type === "Point") {
    yield coords as number[];
  } else if (geometry.type === "Polygon") {
    for (const ring of coords as number[][][]) yield* ring;
  } else if (geometry.type === "MultiPolygon") {
    for (const poly of coords as number[][][][]) for (const ring of poly) yield* ring;
  }
}

function bounds(collection: FeatureCollection): Bounds | null {
  let box: Bounds | null = null;
  for (const f of collection.features) {
    if (!f.geometry) continue;
    for (const [x, y] of positions(f.geometry)) {
      if (!box) box = { minX: x, minY: y, maxX: x, maxY: y };
      box.minX = Math.min(box.minX, x);
      box.minY = Math.min(box.minY, y);
      box.maxX = Math.max(box.maxX, x);
      box.maxY = Math.max(box.maxY, y);
    }
  }
  return box;
}

export function renderMapSvg(collection: FeatureCollection, width = 640, height = 480): string {
  const box = bounds(collection);
  if (!box) return `<svg width="${width}" height="${height}"></svg>`;
  const spanX = box.maxX - box.minX || 1;
  const spanY = box.maxY - box.minY || 1;
  const scale = Math.min((width - 20) / spanX, (height - 20) / spanY);
  const tx = (x: number) => 10 + (x - box.minX) * scale;
  const ty = (y: number) => height - 10 - (y - box.minY) * scale; // planar y grows north

  const shapes: string[] = [];
  for (const f of collection.features) {
    shapes.push(featureSvg(f, tx, ty));
  }
  return `<svg width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">`
    + shapes.join("") + "</svg>";
}

function featureSvg(
  f: MapFeature, tx: (x: number) => number, ty: (y: number) => number,
): string {
  if (!f.geometry) return "";
  const color = levelColor(f.properties.level);
  const title = `<title>${f.properties.key}: ${f.properties.level}`
    + (f.properties.value !== null ? ` (${f.properties.value.toFixed(2)})` : "")
    + `</title>`;
  if (f.geometry.type === "Point") {
    const [x, y] = f.geometry.coordinates as number[];
    return `<circle cx="${tx(x).toFixed(1)}" cy="${ty(y).toFixed(1)}" r="4"`
      + ` fill="${color}" stroke="#333" stroke-width="0.5">${title}</circle>`;
  }
  const polys = f.geometry.type === "Polygon"
    ? [f.geometry.coordinates as number[][][]]
    : (f.geometry.coordinates as number[][][][]);
  const paths: string[] = [];
  for (const poly of polys) {
    for (const ring of poly) {
      const d = ring.map(([x, y], i) =>
        `${i === 0 ? "M" : "L"}${tx(x).toFixed(1)},${ty(y).toFixed(1)}`).join(" ");
      paths.push(d + " Z");
    }
  }
  return `<path d="${paths.join(" ")}" fill="${color}" fill-opacity="0.65"`
    + ` fill-rule="evenodd" stroke="#333" stroke-width="0.8">${title}</path>`;
}
