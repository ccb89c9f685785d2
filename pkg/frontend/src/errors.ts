/** Invalid caller-supplied buffer or option. Raised before any request is sent. */
export class ArgumentError extends Error {
  readonly field: string

  constructor(field: string, message: string) {
    super(`${field}: ${message}`)
    this.name = 'ArgumentError'
    this.field = field
  }
}

/** Malformed TLM or PGM bytes. */
export class FormatError extends Error {
  constructor(message: string) {
    super(message)
    this.name = 'FormatError'
  }
}

/** Payload ends before the declared size. */
export class TruncationError extends FormatError {
  constructor(message: string) {
    super(message)
    this.name = 'TruncationError'
  }
}

/**
 * Non-2xx response from the service. For domain errors (HTTP 400) `kind`
 * carries the server-side error class name (FormatError, ShapeError, ...).
 */
export class ServiceError extends Error {
  readonly status: number
  readonly kind: string

  constructor(status: number, kind: string, detail: string) {
    super(`${kind}: ${detail}`)
    this.name = 'ServiceError'
    this.status = status
    this.kind = kind
  }
}
