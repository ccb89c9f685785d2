/**
 * Cross-interface parity gate: on 100 random instances the client's
 * lossWithGrad and evaluate results must equal the batch CLI's output bit
 * for bit. Reports are compared as parsed JSON (both sides serialize the
 * same doubles, so value equality is bit equality); gradients are compared
 * as raw TLM bytes.
 */

import { readFileSync, rmSync, writeFileSync } from 'node:fs'
import path from 'node:path'
import { describe, expect, inject, it } from 'vitest'

import {
  ToposegClient,
  encodeMask,
  encodeTensor,
  type BufferView,
  type LossOptions,
} from '../src/index.js'
import { mulberry32, randLikelihood, randMask, runCli, tempDir } from './helpers.js'

const INSTANCES = 100

const client = new ToposegClient(inject('baseUrl'))
const python = inject('python')
const pkgRoot = inject('pkgRoot')

interface LossInstance {
  pred: BufferView
  gt: BufferView
  options: LossOptions
  flags: string[]
}

function lossInstance(rng: () => number, index: number): LossInstance {
  if (index === 0) {
    // the worked strip fixture, pinned so cross-interface equality covers it
    return {
      pred: { data: new Float32Array([0, 0.9, 0.9, 0, 0.6]), shape: [1, 1, 5] },
      gt: { data: Uint8Array.from([0, 1, 1, 0, 0]), shape: [1, 5] },
      options: {},
      flags: [],
    }
  }
  const categories = 1 + (index % 3)
  const h = 4 + (index % 3)
  const w = 5 + ((index >> 1) % 3)
  const pred: BufferView = { data: randLikelihood(rng, categories, h, w), shape: [categories, h, w] }
  const gt: BufferView = { data: randMask(rng, h, w, categories), shape: [h, w] }
  let options: LossOptions = {}
  let flags: string[] = []
  switch (index % 4) {
    case 1:
      options = { epoch: index % 13, warmup: 7 }
      flags = ['--epoch', String(index % 13), '--warmup', '7']
      break
    case 2:
      options = { lambdaD: 0.5, lambdaCl: 0.25, lambdaPer: 0.25, epoch: 3 }
      flags = ['--lambda-d', '0.5', '--lambda-cl', '0.25', '--lambda-per', '0.25', '--epoch', '3']
      break
    case 3:
      options = { epoch: 0, skelIters: 4 }
      flags = ['--epoch', '0', '--skel-iters', '4']
      break
  }
  return { pred, gt, options, flags }
}

describe('binding parity against the CLI', () => {
  it(`lossWithGrad matches cmd loss bit for bit on ${INSTANCES} instances`, async () => {
    const rng = mulberry32(0xc0ffee)
    const dir = tempDir('toposeg-parity-')
    try {
      for (let i = 0; i < INSTANCES; i++) {
        const { pred, gt, options, flags } = lossInstance(rng, i)
        const predBytes = encodeTensor(pred.shape as [number, number, number], pred.data as Float32Array)
        const gtBytes = encodeMask(gt.shape as [number, number], gt.data as Uint8Array)
        const predPath = path.join(dir, `p${i}.tlm`)
        const gtPath = path.join(dir, `g${i}.pgm`)
        const gradPath = path.join(dir, `grad${i}.tlm`)
        writeFileSync(predPath, predBytes)
        writeFileSync(gtPath, gtBytes)

        const cli = await runCli(python, pkgRoot, ['loss', predPath, gtPath, '--grad', gradPath, ...flags])
        expect(cli.code, `cli stderr for instance ${i}: ${cli.stderr}`).toBe(0)
        const cliReport = JSON.parse(cli.stdout)
        const cliGrad = readFileSync(gradPath)

        const res = await client.lossWithGrad(pred, gt, options)
        expect(res.report, `report diverged on instance ${i}`).toStrictEqual(cliReport)
        const resGradBytes = Buffer.from(encodeTensor(res.gradShape, res.grad))
        expect(resGradBytes.equals(cliGrad), `gradient bytes diverged on instance ${i}`).toBe(true)
      }
    } finally {
      rmSync(dir, { recursive: true, force: true })
    }
  })

  it(`evaluate matches cmd eval bit for bit on ${INSTANCES} instances`, async () => {
    const rng = mulberry32(0xbadc0de)
    const top = 3
    const predDir = tempDir('toposeg-parity-pred-')
    const gtDir = tempDir('toposeg-parity-gt-')
    const instances: { pred: BufferView; gt: BufferView }[] = []
    try {
      for (let i = 0; i < INSTANCES; i++) {
        const h = 5 + (i % 4)
        const w = 4 + ((i >> 2) % 4)
        const pred: BufferView = { data: randMask(rng, h, w, top), shape: [h, w] }
        const gtData = randMask(rng, h, w, top)
        if (i === 0) gtData[0] = top // pin the corpus-wide category count
        const gt: BufferView = { data: gtData, shape: [h, w] }
        instances.push({ pred, gt })
        const stem = `i${String(i).padStart(3, '0')}.pgm`
        writeFileSync(path.join(predDir, stem), encodeMask(pred.shape as [number, number], pred.data as Uint8Array))
        writeFileSync(path.join(gtDir, stem), encodeMask(gt.shape as [number, number], gt.data as Uint8Array))
      }

      const cli = await runCli(python, pkgRoot, ['eval', predDir, gtDir, '--format', 'json'])
      expect(cli.code, `cli stderr: ${cli.stderr}`).toBe(0)
      const corpus = JSON.parse(cli.stdout)
      expect(corpus.categories).toBe(top)
      expect(corpus.images.length).toBe(INSTANCES)

      for (let i = 0; i < INSTANCES; i++) {
        const res = await client.evaluate(instances[i].pred, instances[i].gt, top)
        expect(res.categories).toBe(top)
        expect(corpus.images[i].stem).toBe(`i${String(i).padStart(3, '0')}`)
        expect(res.per_category, `metrics diverged on instance ${i}`).toStrictEqual(
          corpus.images[i].per_category,
        )
      }
    } finally {
      rmSync(predDir, { recursive: true, force: true })
      rmSync(gtDir, { recursive: true, force: true })
    }
  })
})
