/**
 * Document sources for the central viewer.
 *
 * A source knows how many pages a document has, the normalized extracted
 * text of each page (the space all text selectors live in), and how to
 * render a page into a container.
 *
 * TextPageSource renders extracted text directly and supports precise
 * character-offset selection and highlighting, the baseline every browser
 * can run, and what the tests drive. PdfJsSource rasterizes real PDFs via
 * pdf.js; its canvas pages show bundle annotations as page markers, since
 * raster output has no selectable text nodes.
 */

export function normalizeText(text: string): string {
  return text.replace(/\s+/g, " ");
}

export interface DocumentSource {
  readonly locator: string;
  readonly title: string;
  /** Text nodes rendered by renderPage concatenate to pageText exactly. */
  readonly supportsTextOffsets: boolean;
  pageCount(): number;
  pageText(pageIndex: number): string;
  renderPage(pageIndex: number, container: HTMLElement, widthPx: number): Promise<void>;
}

export class TextPageSource implements DocumentSource {
  readonly supportsTextOffsets = true;
  private readonly pages: string[];

  constructor(
    readonly locator: string,
    readonly title: string,
    pages: string[],
  ) {
    this.pages = pages.map(normalizeText);
  }

  pageCount(): number {
    return this.pages.length;
  }

  pageText(pageIndex: number): string {
    const text = this.pages[pageIndex];
    if (text === undefined) throw new Error(`no page ${pageIndex}`);
    return text;
  }

  async renderPage(pageIndex: number, container: HTMLElement, widthPx: number): Promise<void> {
    container.textContent = this.pageText(pageIndex);
    container.style.width = `${widthPx}px`;
  }
}

/** Real PDF rendering through pdf.js (loaded lazily, browser only). */
export class PdfJsSource implements DocumentSource {
  readonly supportsTextOffsets = false;

  private constructor(
    readonly locator: string,
    readonly title: string,
    private readonly pdf: import("pdfjs-dist").PDFDocumentProxy,
    private readonly texts: string[],
  ) {}

  static async open(url: string, title?: string): Promise<PdfJsSource> {
    const pdfjs = await import("pdfjs-dist");
    pdfjs.GlobalWorkerOptions.workerSrc = new URL(
      "pdfjs-dist/build/pdf.worker.min.mjs",
      import.meta.url,
    ).toString();
    const pdf = await pdfjs.getDocument({ url }).promise;
    const texts: string[] = [];
    for (let n = 1; n <= pdf.numPages; n += 1) {
      const page = await pdf.getPage(n);
      const content = await page.getTextContent();
      texts.push(
        normalizeText(
          content.items.map((item) => ("str" in item ? item.str : "")).join(" "),
        ),
      );
    }
    return new PdfJsSource(url, title ?? url, pdf, texts);
  }

  pageCount(): number {
    return this.pdf.numPages;
  }

  pageText(pageIndex: number): string {
    const text = this.texts[pageIndex];
    if (text === undefined) throw new Error(`no page ${pageIndex}`);
    return text;
  }

  async renderPage(pageIndex: number, container: HTMLElement, widthPx: number): Promise<void> {
    const page = await this.pdf.getPage(pageIndex + 1);
    const base = page.getViewport({ scale: 1.0 });
    const scale = widthPx / base.width;
    const viewport = page.getViewport({ scale });
    const canvas = document.createElement("canvas");
    canvas.width = Math.floor(viewport.width);
    canvas.height = Math.floor(viewport.height);
    container.replaceChildren(canvas);
    container.style.width = `${widthPx}px`;
    await page.render({ canvas, viewport }).promise;
  }
}
