import { execFileSync } from "node:child_process";
import { describe, expect, it } from "vitest";

import { evaluatePath, findPath, TenpathError } from "../src/index.js";

const PY = process.env.TENPATH_PYTHON ?? "python3";

const CHAIN_INPUTS = [["i"], ["i", "j"], ["j", "k"], ["k", "m"]];
const CHAIN_OUTPUT = ["m"];
const CHAIN_SIZES = { i: 3, j: 2, k: 3, m: 2 };

function cli(args: string[], stdin?: string): string {
  return execFileSync(PY, ["-m", "tenpath", ...args], {
    input: stdin,
    encoding: "utf8",
    stdio: ["pipe", "pipe", "pipe"],
  });
}

describe("findPath", () => {
  it("returns the 36-flop path on the four-tensor chain", () => {
    const path = findPath(CHAIN_INPUTS, CHAIN_OUTPUT, CHAIN_SIZES, {
      objective: "flops",
      paths: 32,
      seed: 0,
    });
    expect(path).toEqual([
      [0, 1],
      [0, 2],
      [0, 1],
    ]);
  });

  it("returns an empty path for a single-term expression", () => {
    const path = findPath([["i", "j"]], ["j", "i"], { i: 2, j: 3 }, { paths: 4 });
    expect(path).toEqual([]);
  });

  it("surfaces core diagnostics as errors", () => {
    expect(() =>
      findPath([["i", "j"]], ["z"], { i: 2, j: 2, z: 2 }, { paths: 4 }),
    ).toThrowError(/output index 'z'/);
    expect(() =>
      findPath([["i"]], [], { i: 2 }, { paths: 4, timeoutMs: 4 }),
    ).toThrowError(TenpathError);
  });

  it("rejects an unknown cost function with the registry listing", () => {
    expect(() =>
      findPath(CHAIN_INPUTS, CHAIN_OUTPUT, CHAIN_SIZES, {
        paths: 4,
        costFn: "definitely-not-registered",
      }),
    ).toThrowError(/standard/);
  });

  it(
    "matches the CLI path output on 50 seeded random instances",
    { timeout: 300_000 },
    () => {
      for (let seed = 0; seed < 50; seed++) {
        const nodes = 5 + (seed % 8);
        const docText = cli([
          "gen",
          "--family",
          "random",
          "--nodes",
          String(nodes),
          "--edge-prob",
          "0.4",
          "--extent",
          "2",
          "--seed",
          String(seed),
        ]);
        const doc = JSON.parse(docText);
        const fromBinding = findPath(doc.inputs, doc.output, doc.index_sizes, {
          objective: "flops",
          paths: 20,
          seed,
        });
        const fromCli = JSON.parse(
          cli(
            [
              "optimize",
              "--input",
              "-",
              "--output",
              "path",
              "--paths",
              "20",
              "--seed",
              String(seed),
            ],
            docText,
          ).trim(),
        );
        expect(fromBinding).toEqual(fromCli);
      }
    },
  );
});

describe("saturated instances", () => {
  it(
    "parses reports whose flop totals overflow to Infinity",
    { timeout: 120_000 },
    () => {
      const docText = cli([
        "gen",
        "--family",
        "regular",
        "--nodes",
        "5000",
        "--degree",
        "3",
        "--extent",
        "2",
        "--seed",
        "42",
      ]);
      const doc = JSON.parse(docText);
      const path = findPath(doc.inputs, doc.output, doc.index_sizes, {
        paths: 1,
        costFn: "standard",
        seed: 0,
      });
      expect(path.length).toBe(doc.inputs.length - 1);
      const stats = evaluatePath(doc.inputs, doc.output, doc.index_sizes, path);
      expect(stats.totalFlops).toBe(Infinity);
    },
  );
});

describe("evaluatePath", () => {
  it("scores the two reference paths of the chain", () => {
    const balanced = evaluatePath(CHAIN_INPUTS, CHAIN_OUTPUT, CHAIN_SIZES, [
      [2, 3],
      [0, 1],
      [0, 1],
    ]);
    expect(balanced.totalFlops).toBe(44);
    expect(balanced.maxIntermediateSize).toBe(4);
    expect(balanced.treeDepth).toBe(2);

    const skewed = evaluatePath(CHAIN_INPUTS, CHAIN_OUTPUT, CHAIN_SIZES, [
      [0, 1],
      [0, 2],
      [0, 1],
    ]);
    expect(skewed.totalFlops).toBe(36);
    expect(skewed.treeDepth).toBe(3);
  });

  it("rejects an invalid path with the step diagnostic", () => {
    expect(() =>
      evaluatePath(CHAIN_INPUTS, CHAIN_OUTPUT, CHAIN_SIZES, [
        [0, 9],
        [0, 1],
        [0, 1],
      ]),
    ).toThrowError(/step 0/);
  });
});
