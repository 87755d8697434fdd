/** Binary PPM (P6) encode/decode. Frames travel as raw P6 bytes so the
 * channel can flip bits in them and a header hit makes the frame undecodable,
 * mirroring a broken real-world decode. */

export interface Image {
  width: number;
  height: number;
  /** RGB, row-major, 3 bytes per pixel. */
  pixels: Uint8Array;
}

export function encodePpm(image: Image): Uint8Array {
  const header = Buffer.from(`P6\n${image.width} ${image.height}\n255\n`, "ascii");
  const out = new Uint8Array(header.length + image.pixels.length);
  out.set(header, 0);
  out.set(image.pixels, header.length);
  return out;
}

/** Returns null when the payload is not a well-formed P6 image. */
export function decodePpm(data: Uint8Array): Image | null {
  // header: magic, whitespace-separated width/height/maxval, single ws, pixels
  if (data.length < 11 || data[0] !== 0x50 || data[1] !== 0x36) {
    return null;
  }
  let pos = 2;
  const fields: number[] = [];
  while (fields.length < 3 && pos < data.length) {
    while (pos < data.length && isSpace(data[pos])) {
      pos++;
    }
    let value = 0;
    let digits = 0;
    while (pos < data.length && data[pos] >= 0x30 && data[pos] <= 0x39) {
      value = value * 10 + (data[pos] - 0x30);
      digits++;
      pos++;
    }
    if (digits === 0 || digits > 5) {
      return null;
    }
    fields.push(value);
  }
  if (fields.length < 3 || pos >= data.length || !isSpace(data[pos])) {
    return null;
  }
  pos++;
  const [width, height, maxval] = fields;
  if (width < 1 || height < 1 || maxval !== 255) {
    return null;
  }
  const need = width * height * 3;
  if (data.length - pos !== need) {
    return null;
  }
  return { width, height, pixels: data.subarray(pos) };
}

function isSpace(byte: number): boolean {
  return byte === 0x20 || byte === 0x0a || byte === 0x0d || byte === 0x09;
}
