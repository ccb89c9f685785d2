import { defineConfig } from 'vitest/config'

export default defineConfig({
  test: {
    include: ['tests/**/*.test.ts'],
    globalSetup: './tests/server.ts',
    testTimeout: 600_000,
    hookTimeout: 180_000,
    fileParallelism: false,
  },
})
