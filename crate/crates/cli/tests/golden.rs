//! Runs the compiled binary against the checked-in inputs and compares
//! every report byte for byte with its golden file.

use std::path::Path;
use std::process::{Command, Output};

fn prov(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_prov"));
    cmd.args(args)
        .env_remove("PROV_EXPANSION_CAP")
        .current_dir(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/testdata"));
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary should run")
}

const GOLDEN_CASES: &[(&str, &[&str])] = &[
    ("eval-graph", &["eval", "--structure", "graph.prov", "--formula-file", "no-dominant.fo"]),
    ("eval-graph-circuit", &["eval", "--structure", "graph.prov", "--formula-file", "no-dominant.fo", "--circuit-only"]),
    ("eval-open", &["eval", "--structure", "open.prov", "--formula-file", "no-dominant.fo"]),
    ("eval-open-negation", &["eval", "--structure", "open.prov", "--formula-file", "some-dominant.fo"]),
    ("eval-empty-model", &["eval", "--structure", "open.prov", "--formula-file", "no-dominant.fo", "--model", ""]),
    ("eval-full-model", &["eval", "--structure", "open.prov", "--formula-file", "no-dominant.fo", "--model", "E(a,b) E(b,c) E(a,c) E(c,b) E(b,a)"]),
    ("eval-tautology", &["eval", "--structure", "pairs.prov", "--extended", "--formula", "(exists x. forall y. E(x,y)) -> (forall y. exists x. E(x,y))"]),
    ("eval-tautology-negated", &["eval", "--structure", "pairs.prov", "--extended", "--formula", "!((exists x. forall y. E(x,y)) -> (forall y. exists x. E(x,y)))"]),
    ("explain-graph", &["explain", "--structure", "graph.prov", "--formula-file", "no-dominant.fo"]),
    ("explain-graph-minimal", &["explain", "--structure", "graph.prov", "--formula-file", "no-dominant.fo", "--minimal"]),
    ("whynot-m", &["whynot", "--structure", "open.prov", "--formula-file", "dominant-a.fo", "--model", "E(b,c) E(a,c) E(b,a)"]),
    ("whynot-c-minimal", &["whynot", "--structure", "open.prov", "--formula-file", "some-dominant.fo", "--model", "E(a,c) E(c,b) E(b,a)", "--minimal"]),
    ("repairs-m", &["repairs", "--structure", "open.prov", "--formula-file", "dominant-a.fo", "--model", "E(b,c) E(a,c) E(b,a)"]),
    ("repairs-ranked", &["repairs", "--structure", "open.prov", "--formula-file", "some-dominant.fo", "--model", "E(a,c) E(c,b) E(b,a)", "--cost-model", "costs.model"]),
    ("repairs-ranked-lines", &["repairs", "--structure", "open.prov", "--formula-file", "some-dominant.fo", "--model", "E(a,c) E(c,b) E(b,a)", "--cost-model", "costs.model", "--output", "lines"]),
    ("repairs-equation", &["repairs", "--structure", "open.prov", "--formula-file", "some-dominant.fo", "--model", "E(a,c) E(c,b) E(b,a)", "--method", "equation"]),
    ("update-delete", &["update", "--structure", "graph.prov", "--delete", "E(a,b) E(b,c)", "--formula-file", "no-dominant.fo"]),
    ("update-insert", &["update", "--structure", "graph.prov", "--insert", "E(a,c) E(c,b)", "--formula-file", "no-dominant.fo"]),
    ("count-empty", &["count", "--structure", "open.prov", "--model", "", "--formula-file", "no-dominant.fo"]),
    ("score-viterbi", &["score", "--structure", "graph.prov", "--formula-file", "no-dominant.fo", "--semiring", "viterbi", "--assign", "confidence.assign"]),
    ("score-access", &["score", "--structure", "graph.prov", "--formula-file", "no-dominant.fo", "--semiring", "access", "--assign", "clearance.assign"]),
    ("score-monomial", &["score", "--structure", "graph.prov", "--formula", "E(a,b) & !E(a,c)", "--semiring", "access", "--assign", "clearance.assign"]),
    ("score-maximize", &["score", "--structure", "open.prov", "--formula-file", "some-dominant.fo", "--maximize", "--assign", "third.assign"]),
    ("trees-disjunction", &["trees", "--structure", "graph.prov", "--formula", "E(a,b) | E(b,a)", "--tree-limit", "10"]),
];

#[test]
fn reports_match_their_goldens() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/testdata/golden");
    for (name, args) in GOLDEN_CASES {
        let out = prov(args, &[]);
        assert!(
            out.status.success(),
            "{name}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        let got = String::from_utf8(out.stdout).expect("reports are utf-8");
        let want = std::fs::read_to_string(dir.join(format!("{name}.txt")))
            .unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(got, want, "stdout drifted from golden `{name}`");
    }
}

#[test]
fn repeated_runs_are_byte_identical() {
    let args = GOLDEN_CASES[2].1;
    let first = prov(args, &[]).stdout;
    for _ in 0..3 {
        assert_eq!(prov(args, &[]).stdout, first);
    }
}

const FAILURE_CASES: &[(&[&str], &[(&str, &str)], i32, &str)] = &[
    (
        &["eval", "--structure", "graph.prov", "--formula", "E(a,"],
        &[],
        1,
        "expected a term",
    ),
    (
        &["eval", "--structure", "graph.prov", "--formula", "E(a,b) -> E(b,c)"],
        &[],
        1,
        "extended mode",
    ),
    (
        &["eval", "--structure", "graph.prov", "--formula", "E(a,b)", "--semiring", "bogus"],
        &[],
        2,
        "unknown semiring",
    ),
    (
        &["eval", "--structure", "graph.prov", "--formula", "E(a,b)", "--semiring", "bool"],
        &[],
        1,
        "line 7",
    ),
    (
        &["eval", "--structure", "graph.prov", "--formula-file", "no-dominant.fo", "--cap", "3"],
        &[],
        3,
        "exceeded the cap",
    ),
    (
        &["eval", "--structure", "graph.prov", "--formula-file", "no-dominant.fo"],
        &[("PROV_EXPANSION_CAP", "3")],
        3,
        "exceeded the cap",
    ),
    (
        &["eval", "--structure", "missing.prov", "--formula", "E(a,b)"],
        &[],
        1,
        "missing.prov",
    ),
    (
        &["whynot", "--structure", "graph.prov", "--formula", "E(a,b)"],
        &[],
        4,
        "already holds",
    ),
    (
        &["explain", "--structure", "graph.prov", "--formula", "E(a,c)"],
        &[],
        4,
        "evaluates to 0",
    ),
    (
        &["update", "--structure", "graph.prov", "--formula-file", "no-dominant.fo", "--insert", "E(a,b)"],
        &[],
        4,
        "cannot be inserted",
    ),
    (
        &["update", "--structure", "graph.prov", "--formula-file", "no-dominant.fo", "--delete", "E(a,c)"],
        &[],
        4,
        "cannot be deleted",
    ),
    (
        &["repairs", "--structure", "open.prov", "--formula-file", "some-dominant.fo"],
        &[],
        4,
        "not model-defining",
    ),
    (
        &["score", "--structure", "graph.prov", "--formula", "E(a,b)", "--assign", "confidence.assign"],
        &[],
        2,
        "--semiring",
    ),
    (
        &["eval", "--structure", "graph.prov"],
        &[],
        2,
        "required",
    ),
    (
        &["eval", "--structure", "graph.prov", "--formula", "E(a,b)", "--formula-file", "no-dominant.fo"],
        &[],
        2,
        "cannot be used with",
    ),
];

#[test]
fn failures_map_to_exit_codes() {
    for (args, envs, code, needle) in FAILURE_CASES {
        let out = prov(args, envs);
        let stderr = String::from_utf8_lossy(&out.stderr);
        assert_eq!(
            out.status.code(),
            Some(*code),
            "{args:?} should exit {code}; stderr: {stderr}"
        );
        assert!(
            stderr.contains(needle),
            "{args:?} stderr `{stderr}` should mention `{needle}`"
        );
    }
}

#[test]
fn cap_flag_beats_the_environment() {
    let args = &[
        "eval",
        "--structure",
        "graph.prov",
        "--formula-file",
        "no-dominant.fo",
        "--cap",
        "100",
    ];
    let out = prov(args, &[("PROV_EXPANSION_CAP", "3")]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn lines_mode_emits_only_key_value_pairs() {
    let cases: &[&[&str]] = &[
        &["eval", "--structure", "open.prov", "--formula-file", "no-dominant.fo", "--output", "lines"],
        &["repairs", "--structure", "open.prov", "--formula-file", "some-dominant.fo", "--model", "E(a,c) E(c,b) E(b,a)", "--cost-model", "costs.model", "--output", "lines"],
        &["trees", "--structure", "graph.prov", "--formula-file", "no-dominant.fo", "--tree-limit", "10", "--output", "lines"],
        &["score", "--structure", "open.prov", "--formula-file", "some-dominant.fo", "--maximize", "--assign", "third.assign", "--output", "lines"],
    ];
    for args in cases {
        let out = prov(args, &[]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        for line in String::from_utf8(out.stdout).unwrap().lines() {
            assert!(
                line.split_once(": ").is_some_and(|(k, _)| !k.is_empty()),
                "{args:?} produced a non key-value line: `{line}`"
            );
        }
    }
}
