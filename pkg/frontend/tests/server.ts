/**
 * Global setup: start one toposeg service for the whole run and expose its
 * base URL (plus the python interpreter and repo root for CLI parity runs).
 */

import { spawn, type ChildProcess } from 'node:child_process'
import path from 'node:path'
import { fileURLToPath } from 'node:url'
import type { GlobalSetupContext } from 'vitest/node'

declare module 'vitest' {
  export interface ProvidedContext {
    baseUrl: string
    python: string
    pkgRoot: string
  }
}

const here = path.dirname(fileURLToPath(import.meta.url))
const pkgRoot = path.resolve(here, '..', '..')
const python = process.env.TOPOSEG_PYTHON ?? 'python3'

function waitExit(proc: ChildProcess, ms: number): Promise<void> {
  return new Promise((resolve) => {
    if (proc.exitCode !== null) return resolve()
    const timer = setTimeout(resolve, ms)
    proc.once('exit', () => {
      clearTimeout(timer)
      resolve()
    })
  })
}

export default async function setup({ provide }: GlobalSetupContext) {
  const port = 18700 + (process.pid % 1000)
  const baseUrl = `http://127.0.0.1:${port}`
  const proc = spawn(
    python,
    ['-m', 'toposeg.cli', 'serve', '--host', '127.0.0.1', '--port', String(port)],
    { cwd: pkgRoot, stdio: ['ignore', 'pipe', 'pipe'] },
  )
  let log = ''
  proc.stdout?.on('data', (chunk) => {
    log += chunk
  })
  proc.stderr?.on('data', (chunk) => {
    log += chunk
  })

  const deadline = Date.now() + 120_000
  for (;;) {
    if (proc.exitCode !== null) {
      throw new Error(`service exited before becoming healthy (code ${proc.exitCode}):\n${log}`)
    }
    try {
      const res = await fetch(`${baseUrl}/api/health`)
      if (res.ok) break
    } catch {
      // not listening yet
    }
    if (Date.now() > deadline) {
      proc.kill('SIGKILL')
      throw new Error(`service never became healthy at ${baseUrl}:\n${log}`)
    }
    await new Promise((resolve) => setTimeout(resolve, 250))
  }

  provide('baseUrl', baseUrl)
  provide('python', python)
  provide('pkgRoot', pkgRoot)

  return async () => {
    proc.kill('SIGTERM')
    await waitExit(proc, 5_000)
    if (proc.exitCode === null) proc.kill('SIGKILL')
  }
}
