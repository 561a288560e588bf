/**
 * Demo entry: open a reading session against a running annotation service.
 *
 * Query parameters:
 *   ?service=http://127.0.0.1:8077   service base URL
 *   ?pdf=<url>                       open a real PDF via pdf.js
 * Without ?pdf a built-in text document is opened, which additionally
 * supports precise text selection and highlighting.
 */

import { AnnotationServiceClient } from "./api";
import { ReaderApp } from "./reader";
import { PdfJsSource, TextPageSource } from "./sources";
import "./styles.css";

const DEMO_PAGES = [
  "Early hypertext work imagined machines that extend human memory. " +
    "Bush's seminal article As We May Think is cited early in the opening " +
    "section and frames the discussion of trails and associative indexing. " +
    "Readers wire documents together instead of filing them apart.",
  "Later systems separated content from structure so that links could be " +
    "stored, shared and recombined without rewriting the documents they " +
    "connect. Link services keep those connections alive across media.",
];

async function boot(): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const serviceUrl = params.get("service") ?? "http://127.0.0.1:8077";
  const pdfUrl = params.get("pdf");

  const root = document.getElementById("reader");
  if (!root) throw new Error("missing #reader element");

  const client = new AnnotationServiceClient(serviceUrl);
  const app = new ReaderApp(root, client);

  app.setPanels(
    [
      {
        kind: "web_page",
        locator: "https://en.wikipedia.org/wiki/Vannevar_Bush",
        title: "Vannevar Bush - Wikipedia",
        paragraphs: [
          {
            quote: "Vannevar Bush was an American engineer and inventor",
            elementPath: "body/div[1]/p[2]",
          },
          {
            quote: "He proposed the memex, a machine for storing and retrieving knowledge",
            elementPath: "body/div[1]/p[7]",
          },
        ],
      },
      {
        kind: "video",
        locator: "file:///media/bush-interview.mp4",
        title: "Interview (1965)",
        durationMs: 600_000,
        segments: [
          { startMs: 30_000, endMs: 65_000, label: "0:30–1:05 memex walkthrough" },
          { startMs: 120_000, endMs: 150_000, label: "2:00–2:30 on trails" },
        ],
      },
    ],
    [
      {
        kind: "pdf_document",
        locator: "file:///papers/as-we-may-think-1945.pdf",
        title: "As We May Think (1945)",
        fragments: [
          {
            label: "Figure: the memex desk",
            payload: { kind: "page_region", page_index: 2, x: 0.1, y: 0.2, w: 0.35, h: 0.25 },
          },
          {
            label: "“a device in which an individual stores all his books”",
            payload: {
              kind: "text_span",
              page_index: 4,
              char_start: 120,
              char_end: 173,
              exact_quote: "a device in which an individual stores all his books",
              prefix: "",
              suffix: "",
            },
          },
        ],
      },
    ],
  );

  const source = pdfUrl
    ? await PdfJsSource.open(pdfUrl)
    : new TextPageSource("file:///papers/hypermedia-survey.pdf", "A hypermedia survey", DEMO_PAGES);
  await app.open(source);

  // select text, then press "h" to highlight it
  document.addEventListener("keydown", (event) => {
    if (event.key === "h") void app.highlightSelection();
  });
}

void boot();
