//! Deterministic experiment execution: each run writes a JSON report plus
//! CSV tables into the output directory; identical config and seed produce
//! byte-identical numeric outputs (fixed ordering, shortest round-trip float
//! formatting).

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::asympt::{asymptotic_measure, inequality_chain_check, sectional_capacity_estimate};
use crate::equidist::{
    additivity_verdict, differential_additivity_probe, directional_derivative, limit_measure,
    sandwich_differential, sphere_monomial_dictionary, superadditive_coincidence_check,
    SemigroupFunction, SemigroupPredicate, Verdict,
};
use crate::error::{Error, Result};
use crate::heights::AlgebraicPoint;
use crate::lattices::{slope_inequality_check, AdelicLattice, LinearMapWithHeight, McParams};
use crate::polyalg::sequence_generator;

use super::config::{ExperimentConfig, ExperimentKind};

/// What a run produced.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub kind: String,
    pub out_dir: PathBuf,
    pub artifacts: Vec<String>,
    /// The full report document, as written to report.json.
    pub report: serde_json::Value,
}

/// Validates, then executes the experiment into `out_dir`.
pub fn run_to_dir(config: &ExperimentConfig, out_dir: &Path) -> Result<RunSummary> {
    let issues = config.validate();
    if let Some(first) = issues.iter().find(|i| !i.is_cap) {
        return Err(Error::Schema(format!("{}: {}", first.field, first.message)));
    }
    if let Some(cap) = issues.first() {
        return Err(Error::ConfigCap(format!("{}: {}", cap.field, cap.message)));
    }
    std::fs::create_dir_all(out_dir)?;
    let mut artifacts = Artifacts {
        dir: out_dir.to_path_buf(),
        names: Vec::new(),
    };
    let report = match config.kind {
        ExperimentKind::Heights => run_heights(config, &mut artifacts)?,
        ExperimentKind::OrbitMeasure => run_orbit_measure(config, &mut artifacts)?,
        ExperimentKind::EquidistVerdict => run_equidist_verdict(config, &mut artifacts)?,
        ExperimentKind::AsymptoticMeasure => run_asymptotic_measure(config, &mut artifacts)?,
        ExperimentKind::InvariantsChain => run_invariants_chain(config, &mut artifacts)?,
        ExperimentKind::LatticeProperties => run_lattice_properties(config, &mut artifacts)?,
        ExperimentKind::SemigroupHarness => run_semigroup_harness(config, &mut artifacts)?,
    };
    let document = json!({
        "schema_version": super::config::SCHEMA_VERSION,
        "kind": config.kind.name(),
        "config": config,
        "results": report,
    });
    artifacts.write("report.json", &pretty(&document))?;
    Ok(RunSummary {
        kind: config.kind.name().to_string(),
        out_dir: out_dir.to_path_buf(),
        artifacts: artifacts.names,
        report: document,
    })
}

struct Artifacts {
    dir: PathBuf,
    names: Vec<String>,
}

impl Artifacts {
    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        std::fs::write(self.dir.join(name), contents)?;
        self.names.push(name.to_string());
        Ok(())
    }
}

fn pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable report");
    s.push('\n');
    s
}

fn materialize_points(config: &ExperimentConfig) -> Result<Vec<AlgebraicPoint>> {
    let spec = config
        .sequence
        .as_ref()
        .ok_or_else(|| Error::Schema("sequence required".into()))?;
    let tol = config.precision();
    sequence_generator(spec)?
        .into_iter()
        .map(|p| AlgebraicPoint::from_polynomial(p, tol))
        .collect()
}

fn run_heights(config: &ExperimentConfig, artifacts: &mut Artifacts) -> Result<serde_json::Value> {
    let points = materialize_points(config)?;
    let metric = config.metric()?;
    let heights: Vec<f64> = points
        .par_iter()
        .map(|p| p.height(&metric))
        .collect::<Result<_>>()?;
    let mut csv = String::from("index,label,degree,height\n");
    let mut rows = Vec::new();
    for (i, (p, h)) in points.iter().zip(&heights).enumerate() {
        csv.push_str(&format!("{i},{},{},{h:?}\n", p.label(), p.degree()));
        rows.push(json!({
            "index": i,
            "label": p.label(),
            "degree": p.degree(),
            "height": h,
        }));
    }
    artifacts.write("heights.csv", &csv)?;
    Ok(json!({
        "metric": metric.label(),
        "rows": rows,
        "min_height": heights.iter().cloned().fold(f64::INFINITY, f64::min),
        "max_height": heights.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    }))
}

fn run_orbit_measure(
    config: &ExperimentConfig,
    artifacts: &mut Artifacts,
) -> Result<serde_json::Value> {
    let points = materialize_points(config)?;
    let mut csv = String::from("index,re,im,w\n");
    let mut rows = Vec::new();
    for (i, p) in points.iter().enumerate() {
        let m = p.orbit_measure()?;
        artifacts.write(&format!("measure_{i:03}.json"), &pretty(&m.to_json()))?;
        for a in m.atoms() {
            match a.point {
                crate::measures::SpherePoint::Finite(z) => {
                    csv.push_str(&format!("{i},{:?},{:?},{:?}\n", z.re, z.im, a.weight))
                }
                crate::measures::SpherePoint::Infinity => {
                    csv.push_str(&format!("{i},inf,inf,{:?}\n", a.weight))
                }
            }
        }
        rows.push(json!({"index": i, "label": p.label(), "atoms": m.len()}));
    }
    artifacts.write("orbits.csv", &csv)?;
    Ok(json!({ "rows": rows }))
}

fn run_equidist_verdict(
    config: &ExperimentConfig,
    artifacts: &mut Artifacts,
) -> Result<serde_json::Value> {
    let points = materialize_points(config)?;
    let metric = config.metric()?;
    let horizon = config.horizon.unwrap_or(points.len());
    let window = config.window.unwrap_or((horizon / 8).max(2));
    let tol = config.tol();
    let dictionary = sphere_monomial_dictionary(config.dictionary_degree());

    let verdict = additivity_verdict(&points, &metric, &dictionary, horizon, window, tol)?;
    artifacts.write("verdict.json", &pretty(&verdict))?;

    let mut trend = String::from("twist,m,value\n");
    for twist in &dictionary {
        let d = directional_derivative(&points, &metric, twist, &[1, 2, 3], horizon, window, tol)?;
        for (m, v) in &d.per_m {
            trend.push_str(&format!("{},{m},{v:?}\n", d.twist));
        }
    }
    artifacts.write("trend.csv", &trend)?;

    let mut heights_csv = String::from("index,label,height\n");
    for (i, p) in points[..horizon].iter().enumerate() {
        heights_csv.push_str(&format!("{i},{},{:?}\n", p.label(), p.height(&metric)?));
    }
    artifacts.write("heights.csv", &heights_csv)?;

    let limit = if verdict.verdict == Verdict::Equidistributes {
        let lm = limit_measure(
            &points,
            &metric,
            &dictionary,
            horizon,
            window,
            tol,
            config.moment_degree(),
        )?;
        if let Some(circle) = &lm.circle {
            let mut moments = String::from("k,re,im\n");
            for (k, &(re, im)) in circle.moments.iter().enumerate() {
                moments.push_str(&format!("{k},{re:?},{im:?}\n"));
            }
            artifacts.write("moments.csv", &moments)?;
            let mut density = String::from("theta,density\n");
            for (t, d) in circle.density.grid.iter().zip(&circle.density.density) {
                density.push_str(&format!("{t:?},{d:?}\n"));
            }
            artifacts.write("density.csv", &density)?;
        }
        Some(lm)
    } else {
        None
    };

    Ok(json!({
        "metric": metric.label(),
        "verdict": verdict,
        "limit": limit,
    }))
}

fn run_asymptotic_measure(
    config: &ExperimentConfig,
    artifacts: &mut Artifacts,
) -> Result<serde_json::Value> {
    let metric = config.metric()?;
    let n_list = config
        .n_list
        .clone()
        .ok_or_else(|| Error::Schema("n_list required".into()))?;
    let report = asymptotic_measure(&metric, &n_list, config.minima_path())?;

    let mut minima = String::from("n,i,lower,upper,exact\n");
    let mut measures = String::from("n,t,mass\n");
    let mut invariants = String::from(
        "n,mean,positive_part_mean,sup_support,mean_upper,sup_support_upper,max_bracket_width\n",
    );
    for level in &report.per_n {
        for (i, v) in level.minima.values.iter().enumerate() {
            minima.push_str(&format!(
                "{},{},{:?},{:?},{}\n",
                level.n,
                i + 1,
                v.lower,
                v.upper,
                v.exact
            ));
        }
        for &(t, mass) in level.measure.steps() {
            measures.push_str(&format!("{},{t:?},{mass:?}\n", level.n));
        }
        invariants.push_str(&format!(
            "{},{:?},{:?},{:?},{:?},{:?},{:?}\n",
            level.n,
            level.mean,
            level.positive_part_mean,
            level.sup_support,
            level.mean_upper,
            level.sup_support_upper,
            level.max_bracket_width
        ));
    }
    artifacts.write("minima.csv", &minima)?;
    artifacts.write("measures.csv", &measures)?;
    artifacts.write("invariants.csv", &invariants)?;
    Ok(serde_json::to_value(&report)?)
}

fn run_invariants_chain(
    config: &ExperimentConfig,
    artifacts: &mut Artifacts,
) -> Result<serde_json::Value> {
    let metric = config.metric()?;
    let n_list = config
        .n_list
        .clone()
        .ok_or_else(|| Error::Schema("n_list required".into()))?;
    let chain = inequality_chain_check(&metric, &n_list, config.minima_path())?;
    let mc = McParams {
        samples: config.mc_samples(),
        seed: config.seed.unwrap_or(1),
    };
    let capacity = sectional_capacity_estimate(&metric, &n_list, &mc, config.minima_path())?;

    let mut chain_csv = String::from(
        "metric,sup_support,positive_part_mean,mean,arithmetically_big,chain_ok,mu_ess_closed_form\n",
    );
    chain_csv.push_str(&format!(
        "{},{:?},{:?},{:?},{},{},{}\n",
        chain.metric,
        chain.sup_support,
        chain.positive_part_mean,
        chain.mean,
        chain.arithmetically_big,
        chain.chain_ok,
        chain
            .mu_ess_closed_form
            .map_or("none".to_string(), |v| format!("{v:?}")),
    ));
    artifacts.write("chain.csv", &chain_csv)?;

    let mut capacity_csv =
        String::from("n,chi,chi_std_error,two_chi_over_n_sq,filtration_mean,minkowski_ok\n");
    for level in &capacity.per_n {
        capacity_csv.push_str(&format!(
            "{},{:?},{:?},{:?},{:?},{}\n",
            level.n,
            level.chi.value,
            level.chi.std_error,
            level.two_chi_over_n_sq,
            level.filtration_mean,
            level.minkowski_ok
        ));
    }
    artifacts.write("capacity.csv", &capacity_csv)?;
    Ok(json!({ "chain": chain, "capacity": capacity }))
}

fn run_lattice_properties(
    config: &ExperimentConfig,
    artifacts: &mut Artifacts,
) -> Result<serde_json::Value> {
    let seed = config.seed.expect("validated above");
    let cases = config.cases();
    let mc = McParams {
        samples: config.mc_samples().min(50_000),
        seed,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut csv = String::from("case,source_scales,target_scales,matrix,slack,pass\n");
    let mut rows = Vec::new();
    let mut violations = 0usize;
    let mut produced = 0usize;
    while produced < cases {
        let src = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let tgt = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let m = vec![
            vec![rng.gen_range(-3i64..=3), rng.gen_range(-3i64..=3)],
            vec![rng.gen_range(-3i64..=3), rng.gen_range(-3i64..=3)],
        ];
        let map = LinearMapWithHeight::from_i64(
            &m,
            AdelicLattice::scaled_diagonal(src.to_vec()),
            AdelicLattice::scaled_diagonal(tgt.to_vec()),
        )?;
        if map.is_zero() || !map.is_injective() {
            continue;
        }
        let report = slope_inequality_check(&map, &mc)?;
        if !report.pass {
            violations += 1;
        }
        let matrix_label = format!("{} {};{} {}", m[0][0], m[0][1], m[1][0], m[1][1]);
        csv.push_str(&format!(
            "{produced},{:?}|{:?},{:?}|{:?},{matrix_label},{:?},{}\n",
            src[0], src[1], tgt[0], tgt[1], report.slack, report.pass
        ));
        rows.push(json!({
            "case": produced,
            "source_scales": src,
            "target_scales": tgt,
            "matrix": m,
            "slack": report.slack,
            "pass": report.pass,
        }));
        produced += 1;
    }

    // Monte Carlo degree against the closed form on diagonal data
    let mut chi_csv = String::from("case,log_scales,exact,estimate,std_error,within_4_sigma\n");
    let mut chi_ok = true;
    for case in 0..5 {
        let scales = [rng.gen_range(-0.8..0.8), rng.gen_range(-0.8..0.8)];
        let exact: f64 = scales.iter().sum();
        let oracle = AdelicLattice::general(2, "diag-as-general", move |v: &[f64]| {
            (v[0].abs() * (-scales[0]).exp()).max(v[1].abs() * (-scales[1]).exp())
        });
        let est = oracle.degree(&McParams {
            samples: mc.samples,
            seed: seed.wrapping_add(1000 + case),
        })?;
        let ok = (est.value - exact).abs() <= 4.0 * est.std_error + 0.02;
        chi_ok &= ok;
        chi_csv.push_str(&format!(
            "{case},{:?}|{:?},{exact:?},{:?},{:?},{ok}\n",
            scales[0], scales[1], est.value, est.std_error
        ));
    }
    artifacts.write("instances.csv", &csv)?;
    artifacts.write("chi_check.csv", &chi_csv)?;
    Ok(json!({
        "cases": cases,
        "violations": violations,
        "chi_cross_check_ok": chi_ok,
        "rows": rows,
    }))
}

fn run_semigroup_harness(
    config: &ExperimentConfig,
    artifacts: &mut Artifacts,
) -> Result<serde_json::Value> {
    let seed = config.seed.expect("validated above");
    let cases = config.cases();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let domain = SemigroupPredicate::CoordinateAtLeast { index: 0, bound: 1 };
    let mut csv = String::from("case,kind,monotone,stabilized,conclusion,pass\n");
    let mut rows = Vec::new();
    let mut failures = 0usize;
    for case in 0..cases {
        let tie_case = case % 3 == 2;
        let (row, pass) = if tie_case {
            run_tie_case(&mut rng, &domain, case)?
        } else {
            run_smooth_case(&mut rng, &domain, case)?
        };
        if !pass {
            failures += 1;
        }
        csv.push_str(&format!(
            "{case},{},{},{},{},{pass}\n",
            row["kind"].as_str().unwrap(),
            row["monotone"],
            row["stabilized"],
            row["conclusion"].as_str().unwrap(),
        ));
        rows.push(row);
    }

    // the coincidence forced by domination: min(L1,L2) equals L1 on the
    // subgroup where the two forms agree
    let phi = SemigroupFunction::MinOfLinearForms {
        forms: vec![vec![2, 1], vec![1, 2]],
    };
    let psi = SemigroupFunction::LinearForm { coeffs: vec![2, 1] };
    let samples: Vec<Vec<i64>> = (1..=6).map(|k| vec![k, k]).collect();
    let coincidence = superadditive_coincidence_check(&phi, &psi, &samples)?;

    artifacts.write("cases.csv", &csv)?;
    Ok(json!({
        "cases": cases,
        "failures": failures,
        "coincidence_dominated": coincidence.dominated,
        "coincidence_holds": coincidence.coincides,
        "rows": rows,
    }))
}

fn random_forms(rng: &mut ChaCha8Rng, count: usize) -> Vec<Vec<i64>> {
    (0..count)
        .map(|_| vec![rng.gen_range(-9i64..=9), rng.gen_range(-9i64..=9)])
        .collect()
}

/// Unique-minimizer case: differences must stabilize at the dominating
/// form's value in the direction.
fn run_smooth_case(
    rng: &mut ChaCha8Rng,
    domain: &SemigroupPredicate,
    case: usize,
) -> Result<(serde_json::Value, bool)> {
    loop {
        let form_count = rng.gen_range(2..=4);
        let forms = random_forms(rng, form_count);
        let x = [rng.gen_range(1i64..=5), rng.gen_range(-5i64..=5)];
        let values: Vec<i128> = forms
            .iter()
            .map(|f| f[0] as i128 * x[0] as i128 + f[1] as i128 * x[1] as i128)
            .collect();
        let min = *values.iter().min().unwrap();
        let minimizers: Vec<usize> = (0..forms.len()).filter(|&i| values[i] == min).collect();
        if minimizers.len() != 1 {
            continue;
        }
        let g = SemigroupFunction::LinearForm {
            coeffs: forms[minimizers[0]].clone(),
        };
        let f = SemigroupFunction::MinOfLinearForms { forms };
        let w = [rng.gen_range(-6i64..=6), rng.gen_range(-6i64..=6)];
        let report = sandwich_differential(&f, Some(&g), domain, &x, &w, 120)?;
        let pass = report.monotone && report.stabilized && report.matches_dominating == Some(true);
        return Ok((
            json!({
                "case": case,
                "kind": "unique-minimizer",
                "monotone": report.monotone,
                "stabilized": report.stabilized,
                "conclusion": if report.matches_dominating == Some(true) {
                    "limit equals dominating form"
                } else {
                    "mismatch"
                },
                "limit": report.limit,
                "dominating_value": report.dominating_value,
            }),
            pass,
        ));
    }
}

/// Tie case: the differential is min over the tied forms, and an additivity
/// probe on separating directions must detect non-additivity.
fn run_tie_case(
    rng: &mut ChaCha8Rng,
    domain: &SemigroupPredicate,
    case: usize,
) -> Result<(serde_json::Value, bool)> {
    loop {
        // two distinct forms tied along x
        let l1 = vec![rng.gen_range(-5i64..=5), rng.gen_range(-5i64..=5)];
        let l2 = vec![rng.gen_range(-5i64..=5), rng.gen_range(-5i64..=5)];
        let d = [l1[0] - l2[0], l1[1] - l2[1]];
        if d == [0, 0] {
            continue;
        }
        // x proportional to the rotation of d lies on the tie locus
        let candidate = [-d[1], d[0]];
        let x = if candidate[0] >= 1 {
            candidate
        } else if candidate[0] <= -1 {
            [-candidate[0], -candidate[1]]
        } else {
            continue;
        };
        let f = SemigroupFunction::MinOfLinearForms {
            forms: vec![l1.clone(), l2.clone()],
        };
        // separating directions: d(w1) < 0 < d(w2)
        let mut w1 = None;
        let mut w2 = None;
        for _ in 0..200 {
            let w = [rng.gen_range(-6i64..=6), rng.gen_range(-6i64..=6)];
            let dv = d[0] * w[0] + d[1] * w[1];
            if dv < 0 && w1.is_none() {
                w1 = Some(w);
            }
            if dv > 0 && w2.is_none() {
                w2 = Some(w);
            }
            if w1.is_some() && w2.is_some() {
                break;
            }
        }
        let (Some(w1), Some(w2)) = (w1, w2) else {
            continue;
        };
        let monotone_probe = sandwich_differential(&f, None, domain, &x, &w1.to_vec(), 120)?;
        let probes =
            differential_additivity_probe(&f, domain, &x, &[(w1.to_vec(), w2.to_vec())], 120)?;
        let detected = !probes[0].additive;
        let pass = monotone_probe.monotone && detected;
        return Ok((
            json!({
                "case": case,
                "kind": "tie-point",
                "monotone": monotone_probe.monotone,
                "stabilized": monotone_probe.stabilized,
                "conclusion": if detected {
                    "non-additivity detected"
                } else {
                    "missed non-additivity"
                },
                "probe": probes[0],
            }),
            pass,
        ));
    }
}
