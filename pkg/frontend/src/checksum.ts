// Content checksums matching the server's manifest scheme exactly:
// bundle = sha256 over "name:sha256(content)\n" lines in sorted name order.

export async function sha256Hex(data: string | Uint8Array): Promise<string> {
  const bytes = typeof data === "string" ? new TextEncoder().encode(data) : data;
  const digest = await crypto.subtle.digest("SHA-256", bytes as BufferSource);
  return [...new Uint8Array(digest)].map((b) => b.toString(16).padStart(2, "0")).join("");
}

export async function bundleChecksum(files: Record<string, string>): Promise<string> {
  const names = Object.keys(files).sort();
  let manifest = "";
  for (const name of names) {
    manifest += `${name}:${await sha256Hex(files[name])}\n`;
  }
  return sha256Hex(manifest);
}
