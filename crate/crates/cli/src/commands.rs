//! Subcommand implementations. Each builds a [`Report`] from its arguments; rendering and
//! output are shared.

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde_json::{json, Value};
use usf_core::entropy::{
    exact_wired_window_entropy, per_site_entropy_sequence, plugin_entropy_of_patterns,
    torus_entropy_oracle, EntropyMethod,
};
use usf_core::gibbs::{gibbs_invariance_check, GibbsKind};
use usf_core::graph::{box_block, lattice_vertex};
use usf_core::kirchhoff::{
    count_rooted_forests, count_spanning_trees, deletion_contraction_marginal, edge_marginals,
    LogCount,
};
use usf_core::stats::{
    component_stats, count_fncp, count_near_intersections, detect_trunks, estimate_nu_a,
    log_linear_slope, NearIntersectionConfig,
};
use usf_core::{
    build_box, build_torus, contract, induced_window, io, sample_boundary_mode, BoundaryMode,
    Graph, RandomStream, Window,
};

use crate::report::{cell, Report, Table};
use crate::{
    Command, CountArgs, EntropyArgs, EntropyMethodArg, Failure, Format, GibbsArgs, GraphArgs,
    KindArg, MarginalsArgs, Mode, NuAArgs, OutputArgs, SampleArgs, TrunkArgs,
};

fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Validation(msg.into())
}

fn config_echo<T: serde::Serialize>(args: &T) -> Value {
    serde_json::to_value(args).expect("arguments serialize")
}

fn lattice_pair(flag: &str, v: &[usize]) -> Result<(usize, usize), Failure> {
    match v {
        [d, s] => Ok((*d, *s)),
        _ => Err(invalid(format!("--{flag}: expected DIM,SIDE"))),
    }
}

pub fn load_graph(args: &GraphArgs) -> Result<Graph, Failure> {
    if let Some(path) = &args.graph {
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid(format!("--graph: cannot read {}: {e}", path.display())))?;
        return io::read_graph(&text).map_err(|e| match Failure::from(e) {
            Failure::Validation(m) => invalid(format!("--graph: {m}")),
            other => other,
        });
    }
    if let Some(v) = &args.box_ {
        let (d, s) = lattice_pair("box", v)?;
        return build_box(d, s).map_err(|e| prefix("--box", e));
    }
    if let Some(v) = &args.torus {
        let (d, s) = lattice_pair("torus", v)?;
        return build_torus(d, s).map_err(|e| prefix("--torus", e));
    }
    Err(invalid(
        "--graph/--box/--torus: one graph source is required",
    ))
}

fn prefix(flag: &str, e: usf_core::Error) -> Failure {
    match Failure::from(e) {
        Failure::Validation(m) => invalid(format!("{flag}: {m}")),
        Failure::Capacity(m) => Failure::Capacity(format!("{flag}: {m}")),
        other => other,
    }
}

fn positive(flag: &str, v: u64) -> Result<(), Failure> {
    if v == 0 {
        Err(invalid(format!("--{flag}: must be positive")))
    } else {
        Ok(())
    }
}

/// `X,Y:W,H` block of a lattice graph, or a comma-separated vertex list.
pub fn parse_window<'g>(g: &'g Graph, spec: &str) -> Result<Window<'g>, Failure> {
    let nums = |s: &str| -> Result<Vec<usize>, Failure> {
        s.split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| invalid(format!("--window: `{t}` is not a nonnegative integer")))
            })
            .collect()
    };
    let vertices = match spec.split_once(':') {
        Some((corner, extent)) => {
            box_block(g, &nums(corner)?, &nums(extent)?).map_err(|e| prefix("--window", e))?
        }
        None => nums(spec)?,
    };
    induced_window(g, &vertices).map_err(|e| prefix("--window", e))
}

fn central_window(g: &Graph) -> Result<Window<'_>, Failure> {
    let coords = g
        .coords()
        .ok_or_else(|| invalid("--window: required for graphs without coordinates"))?;
    let corner = vec![(coords.side().saturating_sub(2)) / 2; coords.dim()];
    let extent = vec![2.min(coords.side()); coords.dim()];
    let v = box_block(g, &corner, &extent).map_err(|e| prefix("--window", e))?;
    induced_window(g, &v).map_err(|e| prefix("--window", e))
}

fn emit(report: &Report, output: &OutputArgs, start: Instant) -> Result<(), Failure> {
    let text = match output.format {
        Format::Json => report.to_json(start.elapsed()),
        Format::Csv => report.to_csv().map_err(invalid)?,
        Format::Text => crate::report::render(&report.results) + "\n",
    };
    write_out(output.out.as_deref(), &text)
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| Failure::Runtime(format!("--out: cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn dispatch(command: Command, start: Instant) -> Result<(), Failure> {
    match command {
        Command::Sample(a) => sample(&a),
        Command::Count(a) => count(&a, start),
        Command::Marginals(a) => marginals(&a, start),
        Command::Entropy(a) => entropy(&a, start),
        Command::GibbsTest(a) => gibbs_test(&a, start),
        Command::TrunkStats(a) => trunk_stats(&a, start),
        Command::NuA(a) => nu_a(&a, start),
        Command::Run(_) => unreachable!("handled by the caller"),
    }
}

fn sample(a: &SampleArgs) -> Result<(), Failure> {
    positive("samples", a.samples)?;
    let g = load_graph(&a.graph)?;
    let stream = RandomStream::new(a.seed, 0);
    let mode: BoundaryMode = a.mode.into();
    let texts: Vec<String> = (0..a.samples)
        .into_par_iter()
        .map(|i| {
            sample_boundary_mode(&g, mode, stream.substream(i))
                .map(|f| io::write_forest(&f))
                .map_err(Failure::from)
        })
        .collect::<Result<_, _>>()?;
    match (&a.out, texts.len()) {
        (Some(path), 1) => write_out(Some(path), &texts[0]),
        (Some(dir), _) => {
            std::fs::create_dir_all(dir).map_err(|e| {
                Failure::Runtime(format!("--out: cannot create {}: {e}", dir.display()))
            })?;
            for (i, t) in texts.iter().enumerate() {
                write_out(Some(&dir.join(format!("sample_{i:06}.forest"))), t)?;
            }
            Ok(())
        }
        (None, _) => write_out(None, &texts.join("\n")),
    }
}

fn count_value(c: &LogCount) -> Value {
    match &c.exact {
        Some(n) => json!({"exact": n.to_string(), "log": c.value}),
        None => json!({"exact": null, "log": c.value}),
    }
}

fn count(a: &CountArgs, start: Instant) -> Result<(), Failure> {
    let g = load_graph(&a.graph)?;
    let roots: Option<Vec<usize>> = if a.wired {
        if g.boundary().is_empty() {
            return Err(invalid("--wired: graph has an empty boundary"));
        }
        Some(g.boundary().to_vec())
    } else {
        a.roots.clone()
    };
    let c = match &roots {
        Some(r) => count_rooted_forests(&g, r).map_err(|e| prefix("--roots", e))?,
        None => count_spanning_trees(&g)?,
    };
    if a.format == Format::Text {
        let text = match &c.exact {
            Some(n) => format!("{n}\n"),
            None => format!("exp({})\n", cell(c.value)),
        };
        return write_out(a.out.as_deref(), &text);
    }
    let mut table = Table::new(&["exact", "log"]);
    table.push(vec![
        c.exact.as_ref().map(|n| n.to_string()).unwrap_or_default(),
        cell(c.value),
    ]);
    let report = Report {
        command: "count",
        config: config_echo(a),
        seed: None,
        results: json!({
            "vertices": g.vertex_count(),
            "edges": g.edge_count(),
            "roots": roots,
            "count": count_value(&c),
        }),
        table: Some(table),
    };
    let output = OutputArgs {
        out: a.out.clone(),
        format: a.format,
    };
    emit(&report, &output, start)
}

fn marginals(a: &MarginalsArgs, start: Instant) -> Result<(), Failure> {
    let g = load_graph(&a.graph)?;
    let target = match a.mode {
        Mode::Free => g.clone(),
        Mode::Wired => {
            if g.boundary().is_empty() {
                return Err(invalid("--mode: wired needs a nonempty boundary"));
            }
            contract(&g, &[g.boundary().to_vec()])?.graph
        }
    };
    let table_m = edge_marginals(&target)?;
    let checks: Option<Vec<f64>> = if a.check {
        Some(
            (0..target.edge_count())
                .into_par_iter()
                .map(|e| deletion_contraction_marginal(&target, e))
                .collect::<Result<_, _>>()?,
        )
    } else {
        None
    };
    let mut table = Table::new(&["edge", "u", "v", "marginal", "deletion_contraction"]);
    let mut rows = Vec::new();
    for (e, &p) in table_m.probs.iter().enumerate() {
        let (u, v) = g.edge(e);
        let dc = checks.as_ref().map(|c| c[e]);
        table.push(vec![
            e.to_string(),
            u.to_string(),
            v.to_string(),
            cell(p),
            dc.map(cell).unwrap_or_default(),
        ]);
        rows.push(json!({"edge": e, "u": u, "v": v, "marginal": p, "deletion_contraction": dc}));
    }
    let max_dev = checks.as_ref().map(|c| {
        c.iter()
            .zip(&table_m.probs)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    });
    let report = Report {
        command: "marginals",
        config: config_echo(a),
        seed: None,
        results: json!({
            "marginals": rows,
            "total": table_m.total(),
            "expected_total": target.vertex_count() - target.component_count(),
            "max_deletion_contraction_deviation": max_dev,
        }),
        table: Some(table),
    };
    emit(&report, &a.output, start)
}

fn entropy(a: &EntropyArgs, start: Instant) -> Result<(), Failure> {
    let mut table = Table::new(&[
        "graph",
        "vertex_count",
        "log_count",
        "per_site",
        "std_error",
        "method",
    ]);
    let mut records = Vec::new();
    let mut push = |graph: String,
                    n: usize,
                    log: Option<f64>,
                    per_site: f64,
                    se: Option<f64>,
                    method: &str| {
        table.push(vec![
            graph.clone(),
            n.to_string(),
            log.map(cell).unwrap_or_default(),
            cell(per_site),
            se.map(cell).unwrap_or_default(),
            method.to_string(),
        ]);
        records.push(json!({
            "graph": graph, "vertex_count": n, "log_count": log,
            "per_site": per_site, "std_error": se, "method": method,
        }));
    };
    let mut extra = json!({});
    match a.method {
        EntropyMethodArg::Wired | EntropyMethodArg::Enum => {
            let method = if a.method == EntropyMethodArg::Wired {
                EntropyMethod::WiredExact
            } else {
                EntropyMethod::MuGnEnumerated
            };
            let r = per_site_entropy_sequence(a.dim, &a.sides, method)
                .map_err(|e| prefix("--sides", e))?;
            for rec in r.records {
                push(
                    rec.graph,
                    rec.vertex_count,
                    Some(rec.log_count),
                    rec.per_site,
                    None,
                    method.tag(),
                );
            }
        }
        EntropyMethodArg::Torus => {
            for &side in &a.sides {
                let g = build_torus(a.dim, side).map_err(|e| prefix("--sides", e))?;
                let c = count_spanning_trees(&g)?;
                let n = g.vertex_count();
                push(
                    format!("torus(dim={},side={side})", a.dim),
                    n,
                    Some(c.value),
                    c.value / n as f64,
                    None,
                    "torus-matrix-tree",
                );
            }
        }
        EntropyMethodArg::Oracle => {
            let v = torus_entropy_oracle(a.dim, a.points).map_err(|e| prefix("--points", e))?;
            push(
                format!("torus-limit(dim={})", a.dim),
                0,
                None,
                v,
                None,
                EntropyMethod::TorusIntegral.tag(),
            );
        }
        EntropyMethodArg::Plugin => {
            positive("samples", a.samples)?;
            let mut exact = Vec::new();
            for (j, &side) in a.sides.iter().enumerate() {
                let g = build_box(a.dim, side).map_err(|e| prefix("--sides", e))?;
                let w = match &a.window {
                    Some(spec) => parse_window(&g, spec)?,
                    None => central_window(&g)?,
                };
                let stream = RandomStream::new(a.seed, (j as u64) << 40);
                let patterns: Vec<Vec<usize>> = (0..a.samples)
                    .into_par_iter()
                    .map(|i| {
                        sample_boundary_mode(&g, BoundaryMode::Wired, stream.substream(i))
                            .map(|f| f.window_pattern(&w))
                    })
                    .collect::<Result<_, _>>()?;
                let est = plugin_entropy_of_patterns(&patterns, &w)
                    .map_err(|e| prefix("--samples", e))?;
                let window_exact = if w.internal_edges().len() <= 12 {
                    Some(exact_wired_window_entropy(&g, &w)?)
                } else {
                    None
                };
                exact.push(json!({"side": side, "window": w.vertices(), "exact_wired_window": window_exact}));
                push(
                    format!("box(dim={},side={side})", a.dim),
                    w.vertices().len(),
                    None,
                    est.value,
                    Some(est.std_error),
                    EntropyMethod::PluginEmpirical.tag(),
                );
            }
            extra = json!({"windows": exact});
        }
    }
    let report = Report {
        command: "entropy",
        config: config_echo(a),
        seed: matches!(a.method, EntropyMethodArg::Plugin).then_some(a.seed),
        results: json!({"records": records, "extra": extra}),
        table: Some(table),
    };
    emit(&report, &a.output, start)
}

fn gibbs_test(a: &GibbsArgs, start: Instant) -> Result<(), Failure> {
    positive("samples", a.samples)?;
    let g = load_graph(&a.graph)?;
    let w = parse_window(&g, &a.window)?;
    let kind = match a.kind {
        KindArg::Weak => GibbsKind::Weak,
        KindArg::Strong => GibbsKind::Strong,
    };
    let mode = a.mode.unwrap_or(match a.kind {
        KindArg::Weak => Mode::Wired,
        KindArg::Strong => Mode::Free,
    });
    let c = gibbs_invariance_check(
        &g,
        &w,
        mode.into(),
        kind,
        a.samples,
        RandomStream::new(a.seed, 0),
    )?;
    let mut table = Table::new(&["edge", "pre", "post", "z"]);
    for j in 0..c.window_edges.len() {
        table.push(vec![
            c.window_edges[j].to_string(),
            cell(c.pre_marginals[j]),
            cell(c.post_marginals[j]),
            cell(c.z_scores[j]),
        ]);
    }
    let report = Report {
        command: "gibbs-test",
        config: config_echo(a),
        seed: Some(a.seed),
        results: serde_json::to_value(&c).expect("serializable"),
        table: Some(table),
    };
    emit(&report, &a.output, start)
}

fn trunk_stats(a: &TrunkArgs, start: Instant) -> Result<(), Failure> {
    positive("samples", a.samples)?;
    let g = load_graph(&a.graph)?;
    let cfg = NearIntersectionConfig::new(a.k).with_margin(a.margin.unwrap_or(a.k));
    let stream = RandomStream::new(a.seed, 0);
    let mode: BoundaryMode = a.mode.into();
    let rows: Vec<[u64; 5]> = (0..a.samples)
        .into_par_iter()
        .map(|i| {
            let f = sample_boundary_mode(&g, mode, stream.substream(2 * i))?;
            let mut t = detect_trunks(&g, &f);
            if a.random_orientation {
                t.orient_randomly(&mut stream.substream(2 * i + 1).rng());
            }
            let ni = count_near_intersections(&g, &t, &cfg);
            let fncp: usize = count_fncp(&g, &t.trunks, &cfg).iter().sum();
            let cs = component_stats(&f);
            Ok([
                i,
                cs.component_count as u64,
                t.len() as u64,
                ni,
                fncp as u64,
            ])
        })
        .collect::<Result<_, usf_core::Error>>()?;
    let mut table = Table::new(&[
        "sample",
        "components",
        "trunks",
        "near_intersections",
        "fncp",
    ]);
    for r in &rows {
        table.push(r.iter().map(u64::to_string).collect());
    }
    let mean = |j: usize| rows.iter().map(|r| r[j] as f64).sum::<f64>() / rows.len() as f64;
    let report = Report {
        command: "trunk-stats",
        config: config_echo(a),
        seed: Some(a.seed),
        results: json!({
            "samples": rows.len(),
            "mean_components": mean(1),
            "mean_trunks": mean(2),
            "mean_near_intersections": mean(3),
            "mean_fncp": mean(4),
        }),
        table: Some(table),
    };
    emit(&report, &a.output, start)
}

/// Start and root sets on a 2D box: left column rows side/3 and 2 side/3, right column
/// interior.
pub fn default_nu_sets(g: &Graph) -> Result<(Vec<usize>, Vec<usize>), Failure> {
    let coords = g
        .coords()
        .filter(|c| c.dim() == 2 && c.side() >= 4)
        .ok_or_else(|| {
            invalid("--starts/--roots: required unless the graph is a 2D box of side at least 4")
        })?;
    let s = coords.side();
    let at = |x: usize, y: usize| lattice_vertex(g, &[x, y]).map_err(Failure::from);
    let starts = vec![at(0, s / 3)?, at(0, 2 * s / 3)?];
    let roots = (1..s - 1).map(|y| at(s - 1, y)).collect::<Result<_, _>>()?;
    Ok((starts, roots))
}

fn nu_a(a: &NuAArgs, start: Instant) -> Result<(), Failure> {
    positive("samples", a.samples)?;
    if a.m.is_empty() {
        return Err(invalid("--m: at least one threshold is required"));
    }
    let defaulted = GraphArgs {
        box_: Some(vec![2, 8]),
        ..a.graph.clone()
    };
    let source = if a.graph.graph.is_none() && a.graph.box_.is_none() && a.graph.torus.is_none() {
        &defaulted
    } else {
        &a.graph
    };
    let g = load_graph(source)?;
    let (starts, roots) = match (&a.starts, &a.roots) {
        (Some(s), Some(r)) => (s.clone(), r.clone()),
        (None, None) => default_nu_sets(&g)?,
        (Some(s), None) => (s.clone(), default_nu_sets(&g)?.1),
        (None, Some(r)) => (default_nu_sets(&g)?.0, r.clone()),
    };
    let cfg = NearIntersectionConfig::new(a.k).with_margin(a.margin.unwrap_or(a.k));
    let mut estimates = Vec::new();
    let mut table = Table::new(&["m", "hits", "samples", "estimate", "ci_low", "ci_high"]);
    for (j, &m) in a.m.iter().enumerate() {
        let stream = RandomStream::new(a.seed, (j as u64) << 40);
        let e = estimate_nu_a(&g, &starts, &roots, m, &cfg, stream, a.samples)
            .map_err(|e| prefix("--starts/--roots", e))?;
        table.push(vec![
            m.to_string(),
            e.hits.to_string(),
            e.samples.to_string(),
            cell(e.estimate),
            cell(e.ci_low),
            cell(e.ci_high),
        ]);
        estimates.push(e);
    }
    let xs: Vec<f64> = a.m.iter().map(|&m| m as f64).collect();
    let slope = if a.m.len() >= 2 {
        log_linear_slope(&xs, &estimates).ok()
    } else {
        None
    };
    let report = Report {
        command: "nu-a",
        config: config_echo(a),
        seed: Some(a.seed),
        results: json!({
            "starts": starts,
            "roots": roots,
            "estimates": a.m.iter().zip(&estimates).map(|(m, e)| json!({"m": m, "estimate": e})).collect::<Vec<_>>(),
            "slope": slope,
            "decay_significant": slope.map(|s| s.ci_high < 0.0),
        }),
        table: Some(table),
    };
    emit(&report, &a.output, start)
}
