// Minimal deterministic ZIP writer (STORE only, fixed 1980-01-01 stamps,
// entries in sorted name order) so committing the same solution twice
// downloads byte-identical archives.

const DOS_DATE = 0x0021; // 1980-01-01
const DOS_TIME = 0x0000;

let CRC_TABLE: Uint32Array | null = null;

function crcTable(): Uint32Array {
  if (CRC_TABLE) {
    return CRC_TABLE;
  }
  const table = new Uint32Array(256);
  for (let n = 0; n < 256; n++) {
    let c = n;
    for (let k = 0; k < 8; k++) {
      c = c & 1 ? 0xedb88320 ^ (c >>> 1) : c >>> 1;
    }
    table[n] = c >>> 0;
  }
  CRC_TABLE = table;
  return table;
}

export function crc32(bytes: Uint8Array): number {
  const table = crcTable();
  let c = 0xffffffff;
  for (let i = 0; i < bytes.length; i++) {
    c = table[(c ^ bytes[i]) & 0xff] ^ (c >>> 8);
  }
  return (c ^ 0xffffffff) >>> 0;
}

class ByteWriter {
  private chunks: Uint8Array[] = [];
  length = 0;

  u16(v: number) {
    this.chunks.push(new Uint8Array([v & 0xff, (v >>> 8) & 0xff]));
    this.length += 2;
  }

  u32(v: number) {
    this.chunks.push(
      new Uint8Array([v & 0xff, (v >>> 8) & 0xff, (v >>> 16) & 0xff, (v >>> 24) & 0xff]),
    );
    this.length += 4;
  }

  raw(bytes: Uint8Array) {
    this.chunks.push(bytes);
    this.length += bytes.length;
  }

  concat(): Uint8Array {
    const out = new Uint8Array(this.length);
    let offset = 0;
    for (const chunk of this.chunks) {
      out.set(chunk, offset);
      offset += chunk.length;
    }
    return out;
  }
}

import type { EmitResponse } from "./types.js";

/** Everything that goes into a committed archive: config files + manifest. */
export function archiveFiles(emitted: EmitResponse): Record<string, string> {
  return {
    ...emitted.files,
    "manifest.json": JSON.stringify(emitted.manifest, null, 2) + "\n",
  };
}

/** Build a STORE-method zip of text files, deterministically. */
export function zipStore(files: Record<string, string>): Uint8Array {
  const encoder = new TextEncoder();
  const names = Object.keys(files).sort();
  const writer = new ByteWriter();
  const central = new ByteWriter();
  let count = 0;

  for (const name of names) {
    const nameBytes = encoder.encode(name);
    const data = encoder.encode(files[name]);
    const crc = crc32(data);
    const offset = writer.length;

    writer.u32(0x04034b50); // local file header
    writer.u16(20);
    writer.u16(0);
    writer.u16(0); // STORE
    writer.u16(DOS_TIME);
    writer.u16(DOS_DATE);
    writer.u32(crc);
    writer.u32(data.length);
    writer.u32(data.length);
    writer.u16(nameBytes.length);
    writer.u16(0);
    writer.raw(nameBytes);
    writer.raw(data);

    central.u32(0x02014b50); // central directory record
    central.u16(20);
    central.u16(20);
    central.u16(0);
    central.u16(0);
    central.u16(DOS_TIME);
    central.u16(DOS_DATE);
    central.u32(crc);
    central.u32(data.length);
    central.u32(data.length);
    central.u16(nameBytes.length);
    central.u16(0);
    central.u16(0);
    central.u16(0);
    central.u16(0);
    central.u32(0);
    central.u32(offset);
    central.raw(nameBytes);
    count += 1;
  }

  const centralOffset = writer.length;
  const centralBytes = central.concat();
  writer.raw(centralBytes);
  writer.u32(0x06054b50); // end of central directory
  writer.u16(0);
  writer.u16(0);
  writer.u16(count);
  writer.u16(count);
  writer.u32(centralBytes.length);
  writer.u32(centralOffset);
  writer.u16(0);
  return writer.concat();
}
