/**
 * The fixed 12-hue highlight palette.
 *
 * These values mirror the service's palette table verbatim; the reader only
 * ever looks colors up by the palette indices the service assigns; it
 * never assigns colors itself.
 */

export const PALETTE: readonly string[] = [
  "#4242d7", // 0 blue
  "#8c42d7", // 1 violet
  "#d742d7", // 2 magenta
  "#d7428c", // 3 pink
  "#d74242", // 4 red
  "#d78c42", // 5 orange
  "#d7d742", // 6 yellow
  "#8cd742", // 7 lime
  "#42d742", // 8 green
  "#42d78c", // 9 spring green
  "#42d7d7", // 10 cyan
  "#428cd7", // 11 azure
];

export function paletteColor(index: number): string {
  const color = PALETTE[index];
  if (color === undefined) {
    throw new Error(`palette index out of range: ${index}`);
  }
  return color;
}

/** Translucent fill for painting highlight backgrounds. */
export function highlightFill(index: number): string {
  return paletteColor(index) + "55";
}
