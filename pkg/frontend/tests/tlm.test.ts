import { describe, expect, it } from 'vitest'

import { FormatError, TruncationError, decodeTensor, encodeTensor, TLM_MAGIC } from '../src/index.js'

function header(c: number, h: number, w: number): Uint8Array {
  const out = new Uint8Array(16)
  out.set([0x54, 0x4c, 0x4d, 0x31])
  const view = new DataView(out.buffer)
  view.setUint32(4, c, true)
  view.setUint32(8, h, true)
  view.setUint32(12, w, true)
  return out
}

describe('tlm codec', () => {
  it('lays bytes out as magic, LE dims, LE float32 payload', () => {
    const data = new Float32Array([0, 0.5, 1, 0.25, 0.75, 0.125])
    const bytes = encodeTensor([1, 2, 3], data)
    expect(TLM_MAGIC).toBe('TLM1')
    expect(Array.from(bytes.slice(0, 4))).toEqual([0x54, 0x4c, 0x4d, 0x31])
    expect(Array.from(bytes.slice(0, 16))).toEqual(Array.from(header(1, 2, 3)))
    expect(bytes.length).toBe(16 + 4 * 6)
    const view = new DataView(bytes.buffer)
    for (let i = 0; i < 6; i++) expect(view.getFloat32(16 + 4 * i, true)).toBe(data[i])
  })

  it('round-trips exactly', () => {
    const data = new Float32Array([0.1, 0.9, 0.333, 1, 0, 0.5, 0.25, 0.875])
    const got = decodeTensor(encodeTensor([2, 2, 2], data))
    expect(got.shape).toEqual([2, 2, 2])
    expect(Array.from(got.data)).toEqual(Array.from(data))
  })

  it('decodes views that sit at an offset inside a larger buffer', () => {
    const bytes = encodeTensor([1, 1, 2], new Float32Array([0.5, 0.75]))
    const padded = new Uint8Array(bytes.length + 8)
    padded.set(bytes, 8)
    const got = decodeTensor(padded.subarray(8))
    expect(Array.from(got.data)).toEqual([0.5, 0.75])
  })

  it('rejects bad magic', () => {
    const bytes = encodeTensor([1, 1, 1], new Float32Array([0.5]))
    bytes[0] = 0x58
    expect(() => decodeTensor(bytes)).toThrow(FormatError)
    expect(() => decodeTensor(bytes)).toThrow(/magic/)
  })

  it('rejects truncated header and payload', () => {
    const bytes = encodeTensor([1, 1, 2], new Float32Array([0.5, 0.75]))
    expect(() => decodeTensor(bytes.slice(0, 10))).toThrow(TruncationError)
    expect(() => decodeTensor(bytes.slice(0, bytes.length - 3))).toThrow(TruncationError)
  })

  it('rejects trailing bytes', () => {
    const bytes = encodeTensor([1, 1, 1], new Float32Array([0.5]))
    const extra = new Uint8Array(bytes.length + 1)
    extra.set(bytes)
    expect(() => decodeTensor(extra)).toThrow(/trailing/)
  })

  it('rejects zero dimensions on both sides', () => {
    expect(() => encodeTensor([0, 1, 1], new Float32Array(0))).toThrow(FormatError)
    const zero = header(0, 1, 1)
    expect(() => decodeTensor(zero)).toThrow(/>= 1/)
  })

  it('rejects non-finite values on both sides', () => {
    expect(() => encodeTensor([1, 1, 1], new Float32Array([NaN]))).toThrow(/non-finite/)
    const bytes = new Uint8Array(20)
    bytes.set(header(1, 1, 1))
    new DataView(bytes.buffer).setFloat32(16, Infinity, true)
    expect(() => decodeTensor(bytes)).toThrow(/non-finite/)
  })

  it('rejects a payload length mismatch at encode time', () => {
    expect(() => encodeTensor([1, 2, 3], new Float32Array(5))).toThrow(/elements/)
  })
})
