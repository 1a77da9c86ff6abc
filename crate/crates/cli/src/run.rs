use std::fs;
use std::path::PathBuf;

use anyhow::{Context, Result};
use hyperdyn::analysis::{
    classify_basins, find_attractor, find_noncontraction_witness, janos_metric_probe,
    probe_stability, BasinLabel, JanosVerdict, StabilityConfig, StabilityVerdict,
};
use hyperdyn::dynamics::OperatorOrigin;
use hyperdyn::render::{render_pgm, render_svg, RenderParams};
use hyperdyn::report::{emit_report, Report, ReportFormat};
use hyperdyn::scenarios::{build_scenario, custom_scenario, random_pairs, Scenario};
use hyperdyn::{hausdorff_indexed, iterate, CompactSet, Point};

use crate::config::{Emit, RunConfig, DEFAULT_SEED};

/// Scenario expectations that a completed run did not meet.
#[derive(Debug, Default)]
pub struct RunOutcome {
    pub mismatches: Vec<String>,
}

impl RunOutcome {
    pub fn exit_code(&self) -> u8 {
        if self.mismatches.is_empty() {
            0
        } else {
            2
        }
    }
}

struct Writer {
    dir: PathBuf,
    emit: Emit,
    files: Vec<PathBuf>,
}

impl Writer {
    fn report<R: Report + ?Sized>(&mut self, stem: &str, report: &R) -> Result<()> {
        if self.emit.json {
            self.emit_one(report, ReportFormat::Json, &format!("{stem}.json"))?;
        }
        if self.emit.csv && report.csv().is_some() {
            self.emit_one(report, ReportFormat::Csv, &format!("{stem}.csv"))?;
        }
        Ok(())
    }

    fn emit_one<R: Report + ?Sized>(&mut self, report: &R, fmt: ReportFormat, name: &str) -> Result<()> {
        let path = self.dir.join(name);
        emit_report(report, fmt, &path).with_context(|| format!("writing {}", path.display()))?;
        self.files.push(path);
        Ok(())
    }

    fn raw(&mut self, name: &str, bytes: impl AsRef<[u8]>) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        self.files.push(path);
        Ok(())
    }
}

fn scenario_for(config: &RunConfig) -> Result<Scenario> {
    if let Some(name) = &config.scenario {
        return Ok(build_scenario(name)?);
    }
    let custom = config.custom.clone().expect("validated config");
    let space = std::sync::Arc::new(custom.space.clone());
    let start = custom
        .start
        .map(|pts| {
            let pts = pts.into_iter().map(Point::new).collect::<hyperdyn::Result<Vec<_>>>()?;
            CompactSet::new(space.clone(), 0.0, pts)
        })
        .transpose()?;
    Ok(custom_scenario(custom.space, custom.branches, start)?)
}

fn progress(msg: impl AsRef<str>) {
    eprintln!("{}", msg.as_ref());
}

/// Runs the enabled probes for one scenario and writes their reports
/// under the output directory.
pub fn run(config: &RunConfig) -> Result<RunOutcome> {
    config.validate()?;
    let sc = scenario_for(config)?;
    let d = &sc.defaults;
    let h = config.h.unwrap_or(d.h);
    let tol = config.tol.unwrap_or(d.tol);
    let n_max = config.n_max.unwrap_or(d.n_max);
    let seed = config.seed.unwrap_or(DEFAULT_SEED);
    let emit = Emit::parse(config.emit.as_deref().unwrap_or(&["json".into(), "csv".into()]))?;
    let dir = config.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut w = Writer {
        dir,
        emit,
        files: Vec::new(),
    };
    let mut mismatches = Vec::new();
    let op = sc.operator();
    let probes = &config.probes;
    progress(format!("scenario {} ({})", sc.name, op.name()));

    let mut confirmed: Option<CompactSet> = None;
    if probes.attractor {
        let rep = find_attractor(op, &sc.start, tol, n_max, h)?;
        progress(rep.text_table());
        w.report("attractor", &rep)?;
        if emit.csv {
            let mut s = String::from("step,residual\n");
            for (k, r) in rep.residuals.iter().enumerate() {
                s.push_str(&format!("{},{r}\n", k + 1));
            }
            w.raw("trajectory.csv", s)?;
        }
        if emit.pgm || emit.svg {
            let shown = rep.steps.min(6);
            let mut sets = iterate(op, &sc.start, shown.max(1), h, None)?.sets;
            sets.truncate(shown + 1);
            sets.push(rep.attractor.clone());
            let params = RenderParams::default();
            if emit.pgm {
                w.raw("attractor.pgm", render_pgm(&sets, &params)?)?;
            }
            if emit.svg {
                w.raw("attractor.svg", render_svg(&sets, &params)?)?;
            }
        }
        let matched = if sc.expected_attractors.is_empty() {
            rep.converged
        } else {
            let best = sc
                .expected_attractors
                .iter()
                .map(|e| hausdorff_indexed(&rep.attractor, e))
                .collect::<hyperdyn::Result<Vec<_>>>()?
                .into_iter()
                .fold(f64::INFINITY, f64::min);
            if best > sc.attractor_tolerance {
                mismatches.push(format!(
                    "attractor is {best:.3e} from every expected attractor (allowed {:.1e})",
                    sc.attractor_tolerance
                ));
            }
            best <= sc.attractor_tolerance
        };
        if matched {
            confirmed = Some(rep.attractor.clone());
        }
    }

    let per_class = config.basin_samples.unwrap_or(d.basin_samples);
    if probes.basins && per_class > 0 && !sc.basin_samplers.is_empty() {
        let tagged = sc.draw_basin_samples(per_class, seed)?;
        let samples: Vec<CompactSet> = tagged.iter().map(|(_, s)| s.clone()).collect();
        let basin_tol = tol.max(1e-3);
        let out = classify_basins(op, &sc.expected_attractors, &samples, basin_tol, d.basin_n_max, h)?;
        let mut csv = String::from("index,expected,label,steps\n");
        let mut wrong = 0;
        for (i, ((class, _), o)) in tagged.iter().zip(&out).enumerate() {
            csv.push_str(&format!("{i},{class},{},{}\n", o.label, o.steps));
            if o.label != BasinLabel::Attractor(*class) {
                wrong += 1;
            }
        }
        progress(format!("basins: {} samples, {wrong} misclassified", out.len()));
        if emit.csv {
            w.raw("basin_labels.csv", csv)?;
        }
        if emit.json {
            w.emit_one(&out, ReportFormat::Json, "basins.json")?;
        }
        if wrong > 0 {
            mismatches.push(format!("{wrong} basin samples reached an unexpected attractor"));
        }
    }

    if probes.stability {
        let target = sc.stability_target.clone().or_else(|| confirmed.clone());
        match target {
            None => progress("stability: skipped, no confirmed attractor"),
            Some(target) => {
                let cfg = StabilityConfig {
                    epsilons: config.epsilons.clone().unwrap_or_else(|| d.epsilons.clone()),
                    deltas: config.deltas.clone().unwrap_or_else(|| d.deltas.clone()),
                    horizon: config.horizon.unwrap_or(d.horizon),
                    samples: config.samples.unwrap_or(d.samples),
                    resolution: h,
                    seed,
                };
                let rep = probe_stability(op, &target, &cfg, &sc.perturbation)?;
                progress(rep.text_table());
                w.report("stability", &rep)?;
                let unstable = rep.verdict == StabilityVerdict::InstabilityWitness;
                match op.origin() {
                    OperatorOrigin::MultivaluedMap => {
                        if unstable && confirmed.is_some() && sc.expect_stable {
                            mismatches.push(
                                "instability witness for an attractor of a multivalued map".into(),
                            );
                        }
                    }
                    OperatorOrigin::SetLevel => {
                        if !unstable && !sc.expect_stable {
                            mismatches.push("expected an instability witness, found none".into());
                        }
                    }
                }
            }
        }
    }

    if let Some(map) = sc.operator.multimap() {
        if probes.witness {
            let wit = find_noncontraction_witness(map, d.witness_trials, d.witness_target, seed)?;
            progress(format!("witness: {}", wit.text().trim_end().replace('\n', "; ")));
            if emit.json {
                w.emit_one(&wit, ReportFormat::Json, "witness.json")?;
            }
            if let Some(expected) = sc.expect_witness {
                if wit.is_some() != expected {
                    mismatches.push(format!(
                        "non-contraction witness {} but {} expected",
                        if wit.is_some() { "found" } else { "not found" },
                        if expected { "one was" } else { "none was" }
                    ));
                }
            }
        }
        if probes.janos {
            let pairs = random_pairs(&sc.space, d.janos_pairs, 4, seed)?;
            let diag = janos_metric_probe(op, d.janos_c, &pairs, d.janos_horizon, d.janos_h)?;
            progress(diag.text_table());
            w.report("janos", &diag)?;
            if let Some(expected) = sc.expect_geometric {
                if (diag.verdict == JanosVerdict::Geometric) != expected {
                    mismatches.push(format!("truncated sup-metric verdict {:?}", diag.verdict));
                }
            }
        }
    }

    progress(format!("wrote {} files to {}", w.files.len(), w.dir.display()));
    for m in &mismatches {
        progress(format!("expectation mismatch: {m}"));
    }
    Ok(RunOutcome { mismatches })
}

/// Name and notes of every catalog scenario.
pub fn list_scenarios() -> Result<String> {
    let mut s = String::new();
    for name in hyperdyn::scenarios::scenario_names() {
        let sc = build_scenario(name)?;
        s.push_str(&format!("{name}\n    {}\n", sc.notes));
    }
    Ok(s)
}

