/** Download artifacts that are byte-identical to the service response. */

export interface DownloadArtifact {
  filename: string;
  mimeType: string;
  bytes: string;
}

export function jsonArtifact(filename: string, rawText: string): DownloadArtifact {
  return { filename, mimeType: 'application/json', bytes: rawText };
}

/** Trigger a browser download. No-op outside the DOM. */
export function triggerDownload(artifact: DownloadArtifact): void {
  if (typeof document === 'undefined') return;
  const blob = new Blob([artifact.bytes], { type: artifact.mimeType });
  const url = URL.createObjectURL(blob);
  const link = document.createElement('a');
  link.href = url;
  link.download = artifact.filename;
  link.click();
  URL.revokeObjectURL(url);
}
