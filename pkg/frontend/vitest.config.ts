import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "jsdom",
    // the integration suite boots the real play service (one supervised
    // warm start) before its first test
    hookTimeout: 240_000,
    testTimeout: 120_000,
  },
});
