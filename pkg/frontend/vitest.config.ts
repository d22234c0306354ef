import { defineConfig } from "vitest/config";

// integration tests spawn the Python service and compile frames end to
// end, so the budgets are generous
export default defineConfig({
  test: {
    testTimeout: 120_000,
    hookTimeout: 120_000,
  },
});
