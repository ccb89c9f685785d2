/**
 * Binary PGM (P5) mask codec. Pixel value = category label, 0 = background,
 * maxval fixed at 255. The header parser tolerates '#' comments and extra
 * whitespace; bytes after the payload are ignored.
 */

import { FormatError, TruncationError } from './errors.js'

export const PGM_MAXVAL = 255

export interface Mask {
  /** [height, width] */
  shape: [number, number]
  data: Uint8Array
}

export function encodeMask(shape: readonly [number, number], data: Uint8Array): Uint8Array {
  const [h, w] = shape
  if (!Number.isInteger(h) || !Number.isInteger(w) || h < 1 || w < 1) {
    throw new FormatError(`mask dimensions must be positive integers, got ${h}x${w}`)
  }
  if (data.length !== h * w) {
    throw new FormatError(`payload has ${data.length} bytes, shape needs ${h * w}`)
  }
  const header = `P5\n${w} ${h}\n${PGM_MAXVAL}\n`
  const out = new Uint8Array(header.length + data.length)
  for (let i = 0; i < header.length; i++) out[i] = header.charCodeAt(i)
  out.set(data, header.length)
  return out
}

const isSpace = (b: number) => b === 0x20 || b === 0x09 || b === 0x0a || b === 0x0d || b === 0x0b || b === 0x0c

export function decodeMask(bytes: Uint8Array): Mask {
  if (bytes.length < 2 || bytes[0] !== 0x50 || bytes[1] !== 0x35) {
    throw new FormatError('not a binary PGM: missing P5 magic')
  }
  let pos = 2
  const fields: number[] = []
  while (fields.length < 3) {
    while (pos < bytes.length && isSpace(bytes[pos])) pos++
    if (pos < bytes.length && bytes[pos] === 0x23) {
      // comment runs to end of line
      while (pos < bytes.length && bytes[pos] !== 0x0a) pos++
      if (pos === bytes.length) throw new FormatError('PGM header comment never ends')
      pos++
      continue
    }
    let end = pos
    while (end < bytes.length && bytes[end] >= 0x30 && bytes[end] <= 0x39) end++
    if (end === pos) throw new FormatError('malformed PGM header')
    let value = 0
    for (let i = pos; i < end; i++) value = value * 10 + (bytes[i] - 0x30)
    fields.push(value)
    pos = end
  }
  const [width, height, maxval] = fields
  if (width < 1 || height < 1) {
    throw new FormatError(`PGM dimensions must be >= 1, got ${width}x${height}`)
  }
  if (maxval !== PGM_MAXVAL) {
    throw new FormatError(`PGM maxval must be ${PGM_MAXVAL}, got ${maxval}`)
  }
  if (pos >= bytes.length || !isSpace(bytes[pos])) {
    throw new FormatError('PGM header not terminated by whitespace')
  }
  pos++
  if (bytes.length - pos < height * width) {
    throw new TruncationError(
      `PGM payload truncated: expected ${height * width} bytes, got ${bytes.length - pos}`,
    )
  }
  return { shape: [height, width], data: bytes.slice(pos, pos + height * width) }
}
