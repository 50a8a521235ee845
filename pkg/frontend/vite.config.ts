/// <reference types="vitest/config" />
import { defineConfig } from "vite";

export default defineConfig({
  test: {
    environment: "jsdom",
    globalSetup: "./test/global-setup.ts",
    testTimeout: 120_000,
    hookTimeout: 120_000,
  },
});
