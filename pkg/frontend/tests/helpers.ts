import { execFile } from 'node:child_process'
import { mkdtempSync } from 'node:fs'
import os from 'node:os'
import path from 'node:path'

/** Small deterministic PRNG so parity instances are reproducible. */
export function mulberry32(seed: number): () => number {
  let state = seed >>> 0
  return () => {
    state = (state + 0x6d2b79f5) >>> 0
    let t = state
    t = Math.imul(t ^ (t >>> 15), t | 1)
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61)
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296
  }
}

export function randLikelihood(rng: () => number, c: number, h: number, w: number): Float32Array {
  const out = new Float32Array(c * h * w)
  for (let i = 0; i < out.length; i++) out[i] = 0.02 + 0.96 * rng()
  return out
}

/** Random labels in 0..top, biased toward background. */
export function randMask(rng: () => number, h: number, w: number, top: number): Uint8Array {
  const out = new Uint8Array(h * w)
  for (let i = 0; i < out.length; i++) {
    const u = rng()
    out[i] = u < 0.5 ? 0 : 1 + Math.floor(rng() * top) % top
  }
  return out
}

export interface CliResult {
  code: number
  stdout: string
  stderr: string
}

export function runCli(python: string, cwd: string, args: string[]): Promise<CliResult> {
  return new Promise((resolve, reject) => {
    execFile(
      python,
      ['-m', 'toposeg.cli', ...args],
      { cwd, maxBuffer: 64 * 1024 * 1024 },
      (error, stdout, stderr) => {
        if (error && typeof error.code !== 'number') return reject(error)
        resolve({ code: error ? (error.code as number) : 0, stdout, stderr })
      },
    )
  })
}

export function tempDir(prefix: string): string {
  return mkdtempSync(path.join(os.tmpdir(), prefix))
}
