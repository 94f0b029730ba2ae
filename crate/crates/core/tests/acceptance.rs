//! Acceptance gate. Runs every criterion, prints one PASS/FAIL line each,
//! and exits nonzero if any criterion fails or overruns its time limit.
//!
//! Expected lengths are recomputed here from the instance parameters rather
//! than taken from the library's closed forms.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use itertools::Itertools;
use num_integer::binomial;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use picod::construct::{build_zero_pattern, sample_sparse_mds, synthesize, ConstructOptions};
use picod::gf::{Field, FieldSpec};
use picod::linalg::Matrix;
use picod::model::{DecentralizedCode, KnowledgeMode, ProblemInstance, RationalLength, Schedule};
use picod::oracle::{certified_minimum, exists_valid_code, SearchOptions, SearchSpace, Strategy};
use picod::theorems::optimal_length;
use picod::verify::{decodable_messages, validate};

type Outcome = Result<String, String>;

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Duration,
    run: fn() -> Outcome,
}

fn ratio(num: u64, den: u64) -> RationalLength {
    RationalLength::new(num, den).unwrap()
}

fn gf2() -> FieldSpec {
    FieldSpec::with_default_poly(1).unwrap()
}

/// Consecutive S: t n / (n - 1) when every user holds m - t messages,
/// min{smax + t, m - smin} otherwise.
fn expected_consecutive(m: usize, t: usize, smin: usize, smax: usize) -> RationalLength {
    if smin == m - t && smax == m - t {
        let n = binomial(m as u64, smin as u64);
        ratio(t as u64 * n, n - 1)
    } else {
        RationalLength::integer((smax + t).min(m - smin) as u64)
    }
}

/// Complement S: min{m, |S| + 2t - 2}, counting S directly.
fn expected_complement(m: usize, t: usize, smin: usize, smax: usize) -> RationalLength {
    let count = (0..=m - t).filter(|s| !(smin..=smax).contains(s)).count();
    RationalLength::integer(m.min(count + 2 * t - 2) as u64)
}

fn consecutive_grid(m_max: usize, t_max: usize) -> Vec<(usize, usize, usize, usize)> {
    let mut grid = Vec::new();
    for m in 2..=m_max {
        for t in 1..=t_max.min(m - 1) {
            for smin in 0..=m - t {
                for smax in smin.max(1)..=m - t {
                    grid.push((m, t, smin, smax));
                }
            }
        }
    }
    grid
}

fn complement_grid(m_max: usize, t_max: usize) -> Vec<(usize, usize, usize, usize)> {
    let mut grid = Vec::new();
    for m in 3..=m_max {
        for t in 1..=t_max.min(m - 1) {
            for smin in 1..m - t {
                for smax in smin..m - t {
                    grid.push((m, t, smin, smax));
                }
            }
        }
    }
    grid
}

fn synth_and_check(inst: &ProblemInstance, expected: RationalLength) -> Result<(), String> {
    let code = synthesize(inst, &ConstructOptions::default()).map_err(|e| format!("{inst}: {e}"))?;
    let report = validate(&code);
    if !report.valid {
        return Err(format!("{inst}: code rejected by verify"));
    }
    if code.length() != expected {
        return Err(format!("{inst}: length {} but expected {expected}", code.length()));
    }
    Ok(())
}

fn criterion_1() -> Outcome {
    let mut count = 0;
    for (m, t, smin, smax) in consecutive_grid(8, 3) {
        if smin == m - t && smax == m - t {
            continue;
        }
        let inst = ProblemInstance::consecutive(m, t, smin, smax).map_err(|e| e.to_string())?;
        synth_and_check(&inst, RationalLength::integer((smax + t).min(m - smin) as u64))?;
        count += 1;
    }
    Ok(format!("{count} instances valid at min{{smax+t, m-smin}}"))
}

fn criterion_2() -> Outcome {
    let mut seen = Vec::new();
    for m in 2..=6 {
        for t in 1..=3.min(m - 1) {
            let s = m - t;
            let inst = ProblemInstance::new(m, t, [s]).map_err(|e| e.to_string())?;
            let expected = expected_consecutive(m, t, s, s);
            synth_and_check(&inst, expected)?;
            seen.push(format!("m={m},t={t}:{expected}"));
        }
    }
    if !seen.contains(&"m=3,t=1:3/2".to_string()) || !seen.contains(&"m=4,t=2:12/5".to_string()) {
        return Err("reference values 3/2 and 12/5 missing".into());
    }
    Ok(format!("{} instances: {}", seen.len(), seen.join(" ")))
}

fn criterion_3() -> Outcome {
    let mut count = 0;
    for (m, t, smin, smax) in complement_grid(8, 3) {
        let inst = ProblemInstance::complement(m, t, smin, smax).map_err(|e| e.to_string())?;
        synth_and_check(&inst, expected_complement(m, t, smin, smax))?;
        count += 1;
    }
    Ok(format!("{count} instances valid at min{{m, |S|+2t-2}}"))
}

fn criterion_4() -> Outcome {
    let inst = ProblemInstance::new(3, 1, [2]).unwrap();
    let strategies = [
        ("closure", SearchOptions::default()),
        ("naive", SearchOptions { strategy: Strategy::Naive, ..Default::default() }),
        ("naive-unpruned", SearchOptions { strategy: Strategy::Naive, symmetry_pruning: false, ..Default::default() }),
    ];
    let mut evaluated = Vec::new();
    for (label, opts) in &strategies {
        // every (beta, k) with k / beta < 3/2, then the witness at 3/2
        for (beta, k, should_exist) in [(1, 1, false), (2, 1, false), (2, 2, false), (2, 3, true)] {
            let space = SearchSpace {
                instance: inst.clone(),
                field: gf2(),
                beta,
                total_subslots: k,
                knowledge_mode: KnowledgeMode::Static,
            };
            let report = exists_valid_code(&space, opts).map_err(|e| e.to_string())?;
            if report.exists() != should_exist {
                return Err(format!("{label}: beta={beta} k={k} exists={}", report.exists()));
            }
            if let Some(code) = report.witness() {
                if !validate(code).valid || code.length() != ratio(3, 2) {
                    return Err(format!("{label}: bad witness"));
                }
            }
            evaluated.push(report.evaluated);
        }
        let min = certified_minimum(&inst, gf2(), 2, KnowledgeMode::Static, opts).map_err(|e| e.to_string())?;
        if min.value != ratio(3, 2) || min.upper_bound_only {
            return Err(format!("{label}: certified minimum {}", min.value));
        }
    }
    Ok(format!(
        "no code below 3/2, witness at 3/2, under closure/naive/unpruned naive ({} candidates)",
        evaluated.iter().sum::<u64>()
    ))
}

/// Least k / beta >= target over beta in 1..=beta_max.
fn best_representable(target: RationalLength, beta_max: u64) -> RationalLength {
    (1..=beta_max)
        .map(|b| {
            let k = (target.num() * b).div_ceil(target.den());
            ratio(k, b)
        })
        .min()
        .unwrap()
}

fn criterion_5() -> Outcome {
    let mut instances = Vec::new();
    for (m, t, smin, smax) in consecutive_grid(4, 2) {
        instances.push((ProblemInstance::consecutive(m, t, smin, smax).unwrap(), expected_consecutive(m, t, smin, smax)));
    }
    for (m, t, smin, smax) in complement_grid(4, 2) {
        instances.push((ProblemInstance::complement(m, t, smin, smax).unwrap(), expected_complement(m, t, smin, smax)));
    }
    let opts = SearchOptions::default();
    let mut escalated = Vec::new();
    for (inst, expected) in &instances {
        let closed = optimal_length(inst).map_err(|e| e.to_string())?.value;
        if closed != *expected {
            return Err(format!("{inst}: closed form {closed}, recomputed {expected}"));
        }
        let min = certified_minimum(inst, gf2(), 2, KnowledgeMode::Static, &opts).map_err(|e| e.to_string())?;
        if min.upper_bound_only {
            return Err(format!("{inst}: search did not finish at beta <= 2"));
        }
        if !validate(&min.witness).valid {
            return Err(format!("{inst}: witness rejected"));
        }
        if min.value == closed {
            continue;
        }
        // k / beta with beta <= 2 cannot equal a value whose denominator exceeds 2
        if closed.den() <= 2 || min.value != best_representable(closed, 2) {
            return Err(format!("{inst}: oracle {} vs closed form {closed}", min.value));
        }
        let wide = SearchOptions { rank_budget: true, witness_trials: 200_000, ..Default::default() };
        let beta_max = closed.den() as usize;
        let full =
            certified_minimum(inst, gf2(), beta_max, KnowledgeMode::Static, &wide).map_err(|e| e.to_string())?;
        if full.value != closed || full.upper_bound_only || !validate(&full.witness).valid {
            return Err(format!(
                "{inst}: beta raised to {beta_max} gives {} (upper bound only: {})",
                full.value, full.upper_bound_only
            ));
        }
        escalated.push(format!("{inst} beta<=2 gives {}, beta={beta_max} gives {}", min.value, full.value));
    }
    Ok(format!(
        "{} instances match; beta raised for {}: [{}]",
        instances.len(),
        escalated.len(),
        escalated.join("; ")
    ))
}

/// Rank by plain elimination, independent of the library's reduction.
fn rank(field: &Field, mut rows: Vec<Vec<u16>>) -> usize {
    let cols = rows.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows.len()).find(|&i| rows[i][c] != 0) else {
            continue;
        };
        rows.swap(r, p);
        let inv = field.inv_raw(rows[r][c]).unwrap();
        for i in 0..rows.len() {
            if i != r && rows[i][c] != 0 {
                let f = field.mul_raw(rows[i][c], inv);
                for j in 0..cols {
                    rows[i][j] ^= field.mul_raw(f, rows[r][j]);
                }
            }
        }
        r += 1;
    }
    r
}

fn criterion_6() -> Outcome {
    let mut instances = 0;
    let mut samples = 0;
    for (m, t, smin, smax) in consecutive_grid(8, 3) {
        let ell = m - smin;
        if !(t < ell && ell < smax + t) {
            continue;
        }
        instances += 1;
        let bound = (m - smin + smax + t - 1) as u64;
        let spec = FieldSpec::at_least(bound).map_err(|e| e.to_string())?;
        if spec.size() as u64 != bound.next_power_of_two() {
            return Err(format!("field for bound {bound} has {} elements", spec.size()));
        }
        let field = Field::new(spec);
        let pattern = build_zero_pattern(m, t, smin, smax).map_err(|e| e.to_string())?;
        let cols = smax + t;
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let c = sample_sparse_mds(&pattern, ell, &field, &mut rng, 1000)
                .map_err(|e| format!("m={m} t={t} smin={smin} smax={smax} seed={seed}: {e}"))?;
            for i in 0..ell {
                let row = c.row(i);
                if row.iter().filter(|&&x| x != 0).count() > smax {
                    return Err(format!("C1 row weight, m={m} t={t} smin={smin} smax={smax} seed={seed}"));
                }
                for (j, &x) in row.iter().enumerate() {
                    if (x != 0) != ((i + j) % cols < smax) {
                        return Err(format!("zero pattern, m={m} t={t} smin={smin} smax={smax} seed={seed}"));
                    }
                }
            }
            for p in t..=ell {
                for subset in (0..cols).combinations(p) {
                    let sub: Vec<Vec<u16>> = (0..ell).map(|i| subset.iter().map(|&j| c.get(i, j)).collect()).collect();
                    if rank(&field, sub) != p {
                        return Err(format!("C2 columns {subset:?}, m={m} t={t} smin={smin} smax={smax} seed={seed}"));
                    }
                }
            }
            samples += 1;
        }
    }
    Ok(format!("{instances} instances x 20 seeds = {samples} matrices satisfy C1 and C2"))
}

/// Messages whose value is pinned by the codeword and the side information,
/// for every transmitted message vector.
fn brute_force_decodable(g: &[Vec<u16>], m: usize, side: &[usize]) -> Vec<usize> {
    let encode = |x: u32| -> Vec<u16> {
        g.iter().map(|row| (0..m).fold(0, |acc, j| acc ^ (row[j] & (x >> j) as u16 & 1))).collect()
    };
    let side_mask: u32 = side.iter().map(|&j| 1 << j).sum();
    let mut pinned: u32 = !side_mask & ((1 << m) - 1);
    for x in 0..1u32 << m {
        let y = encode(x);
        for x2 in 0..1u32 << m {
            if (x2 ^ x) & side_mask == 0 && encode(x2) == y {
                pinned &= !(x2 ^ x);
            }
        }
    }
    (0..m).filter(|j| pinned >> j & 1 == 1).collect()
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let field = Field::with_bits(1).unwrap();
    let mut compared = 0;
    for _ in 0..200 {
        let m = rng.gen_range(2..=4);
        let t = rng.gen_range(1..m);
        let sizes: Vec<usize> = (0..=m - t).filter(|_| rng.gen_bool(0.5)).collect();
        let Ok(inst) = ProblemInstance::new(m, t, if sizes.iter().any(|&s| s > 0) { sizes } else { vec![m - t] }) else {
            return Err("instance construction failed".into());
        };
        let k = rng.gen_range(1..=m + 1);
        let rows: Vec<Vec<u16>> = (0..k).map(|_| (0..m).map(|_| rng.gen_range(0..2)).collect()).collect();
        let g = Matrix::from_rows(field.clone(), m, &rows).unwrap();
        let code = DecentralizedCode::new(inst.clone(), 1, g, Schedule::in_order(&vec![0; k], KnowledgeMode::Static))
            .unwrap();
        for user in code.users() {
            let side: Vec<usize> = user.side_info.iter().copied().collect();
            let lib: Vec<usize> = decodable_messages(&code, user).into_iter().collect();
            let brute = brute_force_decodable(&rows, m, &side);
            if lib != brute {
                return Err(format!("{inst} rows {rows:?} user {side:?}: library {lib:?}, brute force {brute:?}"));
            }
            compared += 1;
        }
    }
    Ok(format!("200 codes, {compared} user decodings agree"))
}

fn criterion_8() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cases: [(&str, usize, usize, usize, usize, u64); 6] = [
        ("consecutive", 5, 1, 1, 2, 0),
        ("consecutive", 6, 2, 2, 3, 0),
        ("consecutive", 6, 2, 2, 3, 11),
        ("consecutive", 4, 2, 2, 2, 0),
        ("complement", 6, 2, 1, 3, 0),
        ("complement", 7, 2, 2, 3, 5),
    ];
    for (i, &(mode, m, t, smin, smax, seed)) in cases.iter().enumerate() {
        let inst = match mode {
            "consecutive" => ProblemInstance::consecutive(m, t, smin, smax),
            _ => ProblemInstance::complement(m, t, smin, smax),
        }
        .unwrap();
        let opts = ConstructOptions { seed, ..Default::default() };
        let a = synthesize(&inst, &opts).unwrap().to_json().unwrap();
        let b = synthesize(&inst, &opts).unwrap().to_json().unwrap();
        if a != b {
            return Err(format!("{inst}: library output differs between runs"));
        }
        let mut files = Vec::new();
        for run in 0..2 {
            let out = dir.path().join(format!("code_{i}_{run}.json"));
            let status = Command::new(env!("CARGO_BIN_EXE_picod"))
                .args(["synth", "--mode", mode])
                .args(["--m", &m.to_string(), "--t", &t.to_string()])
                .args(["--smin", &smin.to_string(), "--smax", &smax.to_string()])
                .args(["--seed", &seed.to_string()])
                .arg("--out")
                .arg(&out)
                .output()
                .map_err(|e| e.to_string())?;
            if !status.status.success() {
                return Err(format!("{inst}: synth exited with {}", status.status));
            }
            files.push(std::fs::read(&out).map_err(|e| e.to_string())?);
        }
        if files[0] != files[1] || files[0] != (a.clone() + "\n").into_bytes() {
            return Err(format!("{inst}: CLI output not byte-identical"));
        }
    }
    Ok(format!("{} configurations byte-identical across runs and between library and CLI", cases.len()))
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { id: 1, name: "consecutive S, integer case", limit: Duration::from_secs(120), run: criterion_1 },
        Criterion { id: 2, name: "consecutive S, fractional case", limit: Duration::from_secs(60), run: criterion_2 },
        Criterion { id: 3, name: "complement-consecutive S", limit: Duration::from_secs(120), run: criterion_3 },
        Criterion { id: 4, name: "converse at desk scale", limit: Duration::from_secs(60), run: criterion_4 },
        Criterion { id: 5, name: "oracle vs closed form", limit: Duration::from_secs(300), run: criterion_5 },
        Criterion { id: 6, name: "sparse MDS sampling", limit: Duration::from_secs(300), run: criterion_6 },
        Criterion { id: 7, name: "decoding oracle equivalence", limit: Duration::from_secs(60), run: criterion_7 },
        Criterion { id: 8, name: "determinism", limit: Duration::from_secs(60), run: criterion_8 },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let result = match result {
            Ok(detail) if elapsed > c.limit => Err(format!("{detail}, but exceeded the {:?} limit", c.limit)),
            other => other,
        };
        let (tag, detail) = match &result {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        println!("criterion {} {tag} {} ({:.2}s): {detail}", c.id, c.name, elapsed.as_secs_f64());
        failed += result.is_err() as usize;
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
