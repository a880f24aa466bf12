//! Acceptance suite: every shipped identity and interface contract, one test
//! per criterion, each printing a single PASS/FAIL line.
//!
//! Run with `cargo test -p voatrace-cli --test acceptance -- --show-output`
//! to see the per-criterion lines.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use voatrace_cli::expr::{parse_state_expr, ExprMode, ParseError};
use voatrace_cli::spec_io::{builtin_preset, lattice_to_spec, parse_lattice_spec, SpecError};
use voatrace_cli::suites::{
    a1_character_sum_case, e8_e2_free_cases, e8_oracle_cases,
    e8_theta_sanity_case, eisenstein_rewriting_cases, lemma1_cases, lemma2_cases, lemma3_cases,
    primary_trace_cases, suite_boson, suite_e2_transform, suite_waldspurger, surjectivity_case,
    CaseResult,
};
use voatrace_core::Error as CoreError;

fn report(number: u32, name: &str, cases: Vec<CaseResult>) {
    let failures: Vec<&CaseResult> = cases.iter().filter(|c| !c.pass).collect();
    if failures.is_empty() {
        println!("ACCEPTANCE {number} ({name}): PASS [{} cases]", cases.len());
    } else {
        println!(
            "ACCEPTANCE {number} ({name}): FAIL [{} of {} cases]",
            failures.len(),
            cases.len()
        );
        for f in &failures {
            println!("  FAIL {}: {}", f.name, f.detail);
        }
        panic!("criterion {number} ({name}) failed");
    }
}

#[test]
fn criterion_01_boson_oracle_equivalence() {
    report(
        1,
        "free-boson oracle equivalence, weight <= 6",
        suite_boson(6),
    );
}

#[test]
fn criterion_02_single_mode_closed_forms() {
    report(
        2,
        "single-mode closed forms, n <= 4, r <= 3",
        lemma1_cases(),
    );
}

#[test]
fn criterion_03_two_mode_closed_forms() {
    report(3, "two-mode closed forms, parameters <= 3", lemma2_cases());
}

#[test]
fn criterion_04_three_mode_structure() {
    report(
        4,
        "three-mode leading-term structure, parameters <= 2",
        lemma3_cases(),
    );
}

#[test]
fn criterion_05_surjectivity() {
    report(
        5,
        "triangular surjectivity of the generating monomials",
        vec![surjectivity_case()],
    );
}

#[test]
fn criterion_06_eisenstein_rewriting() {
    report(
        6,
        "Eisenstein rewriting into E4/E6",
        eisenstein_rewriting_cases(),
    );
}

#[test]
fn criterion_07_e2_transformation() {
    report(7, "numeric E2 transformation law", suite_e2_transform());
}

#[test]
fn criterion_08_e8_modular_decomposition() {
    let mut cases = e8_e2_free_cases(4);
    cases.extend(e8_oracle_cases(4));
    report(
        8,
        "E2-free decomposition on E8 with brute-force cross-check",
        cases,
    );
}

#[test]
fn criterion_09_harmonic_primary_traces() {
    report(
        9,
        "harmonic primary traces match theta/eta by both engines",
        primary_trace_cases(),
    );
}

#[test]
fn criterion_10_cusp_form_instance() {
    report(
        10,
        "isotropic octic theta on E8 is a multiple of eta^24",
        suite_waldspurger(),
    );
}

#[test]
fn criterion_11_e8_theta_normalization() {
    report(11, "E8 theta equals 720 E4", vec![e8_theta_sanity_case()]);
}

#[test]
fn criterion_12_round_trips_and_error_classes() {
    let mut cases = Vec::new();
    cases.extend(randomized_expression_round_trips());
    cases.extend(preset_round_trips());
    cases.extend(error_class_cases());
    cases.push(a1_character_sum_case());
    report(12, "parser and format round trips", cases);
}

fn randomized_expression_round_trips() -> Vec<CaseResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut out = Vec::new();
    for case in 0..100u32 {
        let d: u32 = rng.gen_range(1..=3);
        let mode = if case % 2 == 0 {
            ExprMode::Bracket
        } else {
            ExprMode::Round
        };
        let terms: usize = rng.gen_range(0..=4);
        let mut source = String::new();
        for _ in 0..terms {
            let dir: u32 = rng.gen_range(1..=d);
            let m: u32 = rng.gen_range(1..=5);
            let exp: u32 = rng.gen_range(1..=3);
            let ident = if dir == 1 && rng.gen_bool(0.3) {
                "a".to_string()
            } else {
                format!("h{dir}")
            };
            let (open, close) = match mode {
                ExprMode::Bracket => ('[', ']'),
                ExprMode::Round => ('(', ')'),
            };
            source.push_str(&format!("{ident}{open}-{m}{close}"));
            if exp > 1 {
                source.push_str(&format!("^{exp}"));
            }
            source.push_str(if rng.gen_bool(0.2) { "  " } else { " " });
        }
        source.push_str("vac");
        let name = format!("round trip {case}: {source:?}");
        let first = match parse_state_expr(&source, d, mode) {
            Ok(e) => e,
            Err(e) => {
                out.push(CaseResult {
                    name,
                    pass: false,
                    detail: e.to_string(),
                });
                continue;
            }
        };
        let rendered = first.render();
        match parse_state_expr(&rendered, d, mode) {
            Ok(second) => {
                let ok = first.parsed == second.parsed && second.render() == rendered;
                out.push(CaseResult {
                    name,
                    pass: ok,
                    detail: format!("rendered {rendered:?}"),
                });
            }
            Err(e) => out.push(CaseResult {
                name,
                pass: false,
                detail: format!("re-parse of {rendered:?} failed: {e}"),
            }),
        }
    }
    out
}

fn preset_round_trips() -> Vec<CaseResult> {
    let mut out = Vec::new();
    let root = concat!(env!("CARGO_MANIFEST_DIR"), "/../..");
    for name in ["a1", "e8"] {
        let case = format!("preset {name} round trip");
        let path = format!("{root}/presets/{name}.json");
        let from_file = std::fs::read_to_string(&path).expect("preset file present");
        // the shipped file and the built-in copy are the same bytes
        assert_eq!(
            Some(from_file.as_str()),
            builtin_preset(name),
            "shipped preset and built-in copy diverged"
        );
        let lattice = match parse_lattice_spec(&from_file) {
            Ok(l) => l,
            Err(e) => {
                out.push(CaseResult {
                    name: case,
                    pass: false,
                    detail: e.to_string(),
                });
                continue;
            }
        };
        let wire = lattice_to_spec(&lattice);
        let json = serde_json::to_string_pretty(&wire).expect("serializable");
        let again = match parse_lattice_spec(&json) {
            Ok(l) => l,
            Err(e) => {
                out.push(CaseResult {
                    name: case,
                    pass: false,
                    detail: format!("re-parse failed: {e}"),
                });
                continue;
            }
        };
        let same = lattice.gram() == again.gram()
            && lattice.cosets() == again.cosets()
            && lattice.embedding().map(|e| e.matrix()) == again.embedding().map(|e| e.matrix())
            && json == serde_json::to_string_pretty(&lattice_to_spec(&again)).expect("json");
        out.push(CaseResult {
            name: case,
            pass: same,
            detail: "round trip differed".to_string(),
        });
    }
    out
}

fn error_class_cases() -> Vec<CaseResult> {
    let mut out = Vec::new();
    let mut check = |name: &str, ok: bool, detail: String| {
        out.push(CaseResult {
            name: name.to_string(),
            pass: ok,
            detail,
        });
    };
    let rank_err = parse_state_expr("h3[-1] vac", 2, ExprMode::Bracket);
    check(
        "rank error class",
        matches!(
            rank_err,
            Err(ParseError::Rank {
                direction: 3,
                rank: 2
            })
        ),
        format!("{rank_err:?}"),
    );
    let mode_err = parse_state_expr("h1[2] vac", 2, ExprMode::Bracket);
    check(
        "mode error class",
        matches!(mode_err, Err(ParseError::Mode { mode: 2 })),
        format!("{mode_err:?}"),
    );
    let syn_err = parse_state_expr("h1[-1] oops", 2, ExprMode::Bracket);
    check(
        "syntax error class",
        matches!(syn_err, Err(ParseError::Syntax { .. })),
        format!("{syn_err:?}"),
    );
    let asym = parse_lattice_spec(r#"{"name":"x","gram":[[2,1],[0,2]]}"#);
    check(
        "asymmetric gram error class",
        matches!(asym, Err(SpecError::Core(CoreError::BadGram(_)))),
        format!("{asym:?}"),
    );
    let odd = parse_lattice_spec(r#"{"name":"x","gram":[[1]]}"#);
    check(
        "odd-diagonal gram error class",
        matches!(odd, Err(SpecError::Core(CoreError::BadGram(_)))),
        format!("{odd:?}"),
    );
    let npd = parse_lattice_spec(r#"{"name":"x","gram":[[2,4],[4,2]]}"#);
    check(
        "indefinite gram error class",
        matches!(npd, Err(SpecError::Core(CoreError::BadGram(_)))),
        format!("{npd:?}"),
    );
    let bad_embed = parse_lattice_spec(
        r#"{"name":"x","gram":[[2,0],[0,2]],"embedding":[["1","0"],["1","1"]]}"#,
    );
    check(
        "bad embedding error class",
        matches!(bad_embed, Err(SpecError::Core(CoreError::BadEmbedding(_)))),
        format!("{bad_embed:?}"),
    );
    out
}
