export const VERSION = '0.1.0'

export { ArgumentError, FormatError, ServiceError, TruncationError } from './errors.js'
export { checkLikelihood, checkMask, checkSameGrid, contiguousStrides } from './buffers.js'
export type { BufferView } from './buffers.js'
export { TLM_MAGIC, decodeTensor, encodeTensor } from './tlm.js'
export type { Tensor } from './tlm.js'
export { PGM_MAXVAL, decodeMask, encodeMask } from './pgm.js'
export type { Mask } from './pgm.js'
export { ToposegClient } from './client.js'
export type {
  BarObj,
  CategoryMetricsObj,
  FdSummary,
  LossOptions,
  LossReport,
  LossResult,
  MatchResult,
  MetricsResult,
  ServiceConstants,
} from './client.js'
