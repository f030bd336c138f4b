/** Minimal safe rendering for sample markdown: escape everything, then
 * rewrite image references onto the service's /assets/ route. Full
 * markdown-to-HTML is deliberately out of scope; reviewers see the text
 * as authored. */

const IMAGE_REF = /!\[([^\]]*)\]\(\s*([^)\s]+)\s*\)/g;

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

export function renderSampleMarkdown(md: string, assetBase = "/assets"): string {
  const escaped = escapeHtml(md);
  return escaped.replace(IMAGE_REF, (_match, alt: string, path: string) => {
    if (/^[a-z]+:/i.test(path) || path.startsWith("//")) {
      return `[external image: ${path}]`; // only corpus-relative assets render
    }
    const clean = path.replace(/^\/+/, "");
    return `<img class="md-image" alt="${alt}" src="${assetBase}/${clean}">`;
  });
}
