//! Replays the checked-in fuzz corpus, plus random mutations of it, through
//! the same parser entry points and invariants as the cargo-fuzz targets.

use std::fs;
use std::path::PathBuf;

use proptest::prelude::*;
use replaylab::approx::MlpParams;
use replaylab::env::{grid_optimal_steps, parse_grid_map};
use replaylab::experiment::{parse_config, parse_rows, render_rows, MapSource, TaskConfig};

fn check_grid_map(text: &str) {
    if let Ok(spec) = parse_grid_map(text) {
        let steps = grid_optimal_steps(&spec).expect("parsed map has a reachable goal");
        assert!(steps >= 1 && steps < spec.cell_count());
    }
}

fn check_config(text: &str) {
    if let Ok(configs) = parse_config(text, None) {
        for cfg in &configs {
            if !matches!(
                &cfg.task,
                TaskConfig::GridWorld {
                    map: MapSource::File(_),
                    ..
                }
            ) {
                let _ = cfg.validate();
            }
        }
    }
}

fn check_rows(text: &str) {
    if let Ok(rows) = parse_rows(text) {
        let once = render_rows(&rows);
        let again = parse_rows(&once).expect("rendered rows parse");
        assert_eq!(render_rows(&again), once);
    }
}

fn check_checkpoint(text: &str) {
    if let Ok(params) = MlpParams::parse_checkpoint(text) {
        let mut once = Vec::new();
        params.write_checkpoint(&mut once).unwrap();
        let once = String::from_utf8(once).unwrap();
        let again = MlpParams::parse_checkpoint(&once).expect("written checkpoint parses");
        let mut twice = Vec::new();
        again.write_checkpoint(&mut twice).unwrap();
        assert_eq!(once.as_bytes(), &twice[..]);
    }
}

type Target = (&'static str, fn(&str));

const TARGETS: [Target; 4] = [
    ("parse_grid_map", check_grid_map),
    ("parse_config", check_config),
    ("parse_rows", check_rows),
    ("parse_checkpoint", check_checkpoint),
];

fn corpus(target: &str) -> Vec<Vec<u8>> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fuzz/corpus")
        .join(target);
    let mut seeds: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|entry| fs::read(entry.unwrap().path()).unwrap())
        .collect();
    seeds.sort();
    seeds
}

fn run(check: fn(&str), data: &[u8]) {
    if let Ok(text) = std::str::from_utf8(data) {
        check(text);
    }
}

#[test]
fn every_target_has_seeds_and_accepts_them() {
    for (target, check) in TARGETS {
        let seeds = corpus(target);
        assert!(seeds.len() >= 3, "{target} needs seeds");
        for seed in &seeds {
            run(check, seed);
        }
    }
}

#[test]
fn seeds_cover_accept_and_reject_paths() {
    let ok = |target: &str, accept: fn(&str) -> bool| {
        corpus(target)
            .iter()
            .map(|s| accept(std::str::from_utf8(s).unwrap()))
            .collect::<Vec<_>>()
    };
    let grid = ok("parse_grid_map", |t| parse_grid_map(t).is_ok());
    let rows = ok("parse_rows", |t| parse_rows(t).is_ok());
    let ckpt = ok("parse_checkpoint", |t| MlpParams::parse_checkpoint(t).is_ok());
    let cfg = ok("parse_config", |t| parse_config(t, None).is_ok());
    for (name, v) in [("grid", &grid), ("checkpoint", &ckpt), ("config", &cfg)] {
        assert!(v.contains(&true) && v.contains(&false), "{name}: {v:?}");
    }
    assert!(rows.iter().all(|b| *b));
}

/// Mutation cases per property; set `FUZZ_CASES` for a longer soak.
fn cases() -> u32 {
    std::env::var("FUZZ_CASES")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(512)
}

#[derive(Debug, Clone)]
enum Edit {
    Flip(usize, u8),
    Insert(usize, u8),
    Delete(usize),
    Duplicate(usize, usize),
}

fn apply(mut data: Vec<u8>, edits: &[Edit]) -> Vec<u8> {
    for edit in edits {
        let n = data.len();
        match *edit {
            Edit::Flip(i, b) if n > 0 => data[i % n] ^= b,
            Edit::Insert(i, b) => data.insert(i % (n + 1), b),
            Edit::Delete(i) if n > 0 => {
                data.remove(i % n);
            }
            Edit::Duplicate(i, len) if n > 0 => {
                let start = i % n;
                let end = (start + len).min(n);
                let chunk = data[start..end].to_vec();
                data.splice(start..start, chunk);
            }
            _ => {}
        }
    }
    data
}

fn edit() -> impl Strategy<Value = Edit> {
    // Bias inserted bytes towards the characters the formats care about.
    let byte = prop_oneof![
        any::<u8>(),
        prop::sample::select(b"SG.#\n,=[]- 0123456789e.".to_vec()),
    ];
    prop_oneof![
        (any::<usize>(), any::<u8>()).prop_map(|(i, b)| Edit::Flip(i, b)),
        (any::<usize>(), byte).prop_map(|(i, b)| Edit::Insert(i, b)),
        any::<usize>().prop_map(Edit::Delete),
        (any::<usize>(), 0usize..40).prop_map(|(i, l)| Edit::Duplicate(i, l)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(cases()))]

    #[test]
    fn mutated_seeds_never_panic(
        target in 0usize..4,
        pick in any::<prop::sample::Index>(),
        edits in prop::collection::vec(edit(), 1..12),
    ) {
        let (name, check) = TARGETS[target];
        let seeds = corpus(name);
        let seed = seeds[pick.index(seeds.len())].clone();
        run(check, &apply(seed, &edits));
    }

    #[test]
    fn arbitrary_text_never_panics(text in "\\PC{0,200}") {
        for (_, check) in TARGETS {
            check(&text);
        }
    }
}
