use rayon::prelude::*;
use serde::Serialize;

use qwalk::bloch::{self, bloch_spectrum, pbc_amplitude, BESSEL_MAX_ARGUMENT, BESSEL_MAX_ORDER};
use qwalk::dynamics::{
    self, classical_series, compare_return_with_bulk, first_peak, time_grid, transition_series,
    ProbabilityField, DEFAULT_ONSET_THRESHOLD, DEFAULT_PEAK_FLOOR, OUTPUT_CLAMP,
};
use qwalk::limiting::{
    asymmetry_scan, limiting_by_time_average, limiting_field, scaling_series, write_scaling_csv,
    write_scan_csv, PowerLawFit, ScanConfig,
};
use qwalk::spectral::{decompose_rows, eigenvalues, scaled_tau, DEFAULT_RELATIVE_TAU};
use qwalk::{build_adjacency, decompose, group_degeneracies, node_to_linear, LatticeSpec, Node};

use crate::output::{json_document, prob, real, reals, Cell, Csv, Real};
use crate::spec::NodeSpec;
use crate::{
    BlochArgs, BoundaryArg, Cli, Command, EvolveArgs, Failure, Format, KindArg, LimitingArgs,
    Method, ScalingArgs, ScanArgs, SpectrumArgs,
};

/// Largest number of grid points a single run will evaluate.
const MAX_GRID_POINTS: f64 = 1e7;

pub struct Rendered {
    pub bytes: Vec<u8>,
    /// Human-readable summary lines for standard error.
    pub notes: Vec<String>,
}

#[derive(Serialize)]
struct Meta<'a> {
    command: &'static str,
    version: &'static str,
    #[serde(serialize_with = "real")]
    gamma: f64,
    config: &'a Command,
    tolerances: Tolerances,
}

#[derive(Serialize)]
struct Tolerances {
    degeneracy_relative_tau: Real,
    asymmetry_eta: Real,
    peak_floor: Real,
    onset_threshold: Real,
    output_clamp: Real,
}

fn meta(cli: &Cli) -> Meta<'_> {
    let (tau, eta) = match &cli.command {
        Command::Limiting(a) => (a.tau, qwalk::limiting::DEFAULT_ETA),
        Command::Scan(a) => (a.tau, a.eta),
        Command::Scaling(a) => (a.tau, qwalk::limiting::DEFAULT_ETA),
        _ => (DEFAULT_RELATIVE_TAU, qwalk::limiting::DEFAULT_ETA),
    };
    Meta {
        command: cli.command.name(),
        version: env!("CARGO_PKG_VERSION"),
        gamma: cli.gamma,
        config: &cli.command,
        tolerances: Tolerances {
            degeneracy_relative_tau: Real(tau),
            asymmetry_eta: Real(eta),
            peak_floor: Real(DEFAULT_PEAK_FLOOR),
            onset_threshold: Real(DEFAULT_ONSET_THRESHOLD),
            output_clamp: Real(OUTPUT_CLAMP),
        },
    }
}

/// Every problem with the configuration, checked before any computation.
pub fn validate(command: &Command, gamma: f64) -> Vec<String> {
    let mut p = Vec::new();
    match command {
        Command::Spectrum(a) => check_sizes(&mut p, &a.sizes, a.boundary),
        Command::Evolve(a) => {
            check_sizes(&mut p, &[a.size], a.boundary);
            check_node(&mut p, "--source", a.source, &[a.size]);
            if let Some(k) = a.observe {
                check_node(&mut p, "--observe", k, &[a.size]);
            }
            if a.times.is_empty() {
                check_grid(&mut p, a.t_max, a.dt);
            } else if a.times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
                p.push("--times must be finite and nonnegative".into());
            } else if a.times.windows(2).any(|w| w[1] < w[0]) {
                p.push("--times must be ascending".into());
            }
        }
        Command::Limiting(a) => {
            check_sizes(&mut p, &a.sizes, a.boundary);
            check_node(&mut p, "--source", a.source, &a.sizes);
            check_tau(&mut p, a.tau);
            if a.method == Method::TimeAverage {
                check_grid(&mut p, a.t_max, a.dt);
                if a.t_max <= 0.0 || a.dt > a.t_max {
                    p.push(format!(
                        "time average needs --t-max > 0 and --dt <= --t-max (got {} and {})",
                        a.t_max, a.dt
                    ));
                }
            }
        }
        Command::Scan(a) => {
            if a.n_min < 1 || a.n_min > a.n_max || a.n_max > a.max_side {
                p.push(format!(
                    "scan range needs 1 <= --n-min <= --n-max <= --max-side (got {}, {}, {})",
                    a.n_min, a.n_max, a.max_side
                ));
            }
            check_tau(&mut p, a.tau);
            if !(a.eta >= 0.0 && a.eta.is_finite()) {
                p.push(format!("--eta must be nonnegative and finite, got {}", a.eta));
            }
        }
        Command::Scaling(a) => {
            let count = odd_sizes(a).len();
            if count < 3 {
                p.push(format!(
                    "scaling needs at least 3 odd sizes in [{}, {}], found {count}",
                    a.n_min, a.n_max
                ));
            }
            check_tau(&mut p, a.tau);
        }
        Command::BlochCompare(a) => {
            check_sizes(&mut p, &a.sizes, BoundaryArg::Periodic);
            for &j in &a.source {
                check_node(&mut p, "--source", j, &a.sizes);
            }
            if let Some(k) = a.observe {
                check_node(&mut p, "--observe", k, &a.sizes);
            }
            check_grid(&mut p, a.t_max, a.dt);
            if 2.0 * gamma * a.t_max > BESSEL_MAX_ARGUMENT {
                p.push(format!(
                    "infinite-lattice baseline supports 2 * gamma * t-max <= {BESSEL_MAX_ARGUMENT}"
                ));
            }
            if a.sizes.iter().any(|&n| n > BESSEL_MAX_ORDER as usize) {
                p.push(format!("infinite-lattice baseline supports N <= {BESSEL_MAX_ORDER}"));
            }
        }
    }
    p
}

fn check_sizes(p: &mut Vec<String>, sizes: &[usize], boundary: BoundaryArg) {
    if sizes.is_empty() {
        p.push("at least one size is required".into());
    }
    for &n in sizes {
        if n < 1 {
            p.push("sizes must be at least 1".into());
        } else if boundary == BoundaryArg::Periodic && n < 3 {
            p.push(format!("periodic lattices need N >= 3, got {n}"));
        }
    }
}

fn check_node(p: &mut Vec<String>, flag: &str, node: NodeSpec, sizes: &[usize]) {
    for &n in sizes.iter().filter(|&&n| n >= 1) {
        if let Err(e) = node.resolve(n) {
            p.push(format!("{flag} {node}: {e}"));
        }
    }
}

fn check_grid(p: &mut Vec<String>, t_max: f64, dt: f64) {
    if !(t_max >= 0.0 && t_max.is_finite()) {
        p.push(format!("--t-max must be finite and nonnegative, got {t_max}"));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        p.push(format!("--dt must be positive and finite, got {dt}"));
    } else if t_max / dt > MAX_GRID_POINTS {
        p.push(format!("time grid t-max/dt = {} exceeds {MAX_GRID_POINTS} points", t_max / dt));
    }
}

fn check_tau(p: &mut Vec<String>, tau: f64) {
    if !(tau > 0.0 && tau.is_finite()) {
        p.push(format!("--tau must be positive and finite, got {tau}"));
    }
}

fn odd_sizes(a: &ScalingArgs) -> Vec<usize> {
    (a.n_min.max(1)..=a.n_max).filter(|n| n % 2 == 1).collect()
}

fn lattice(side: usize, boundary: BoundaryArg, gamma: f64) -> Result<qwalk::AdjacencyMatrix, Failure> {
    Ok(build_adjacency(LatticeSpec::new(side, boundary.into(), gamma)?))
}

fn resolve(spec: NodeSpec, side: usize) -> Result<Node, Failure> {
    spec.resolve(side).map_err(|e| Failure::Config(vec![e]))
}

#[derive(Serialize)]
struct NodeOut(usize, usize);

impl From<Node> for NodeOut {
    fn from(n: Node) -> Self {
        NodeOut(n.jx, n.jy)
    }
}

pub fn execute(cli: &Cli) -> Result<Rendered, Failure> {
    let meta = meta(cli);
    match &cli.command {
        Command::Spectrum(a) => spectrum(a, cli, &meta),
        Command::Evolve(a) => evolve(a, cli, &meta),
        Command::Limiting(a) => limiting(a, cli, &meta),
        Command::Scan(a) => scan(a, cli, &meta),
        Command::Scaling(a) => scaling(a, cli, &meta),
        Command::BlochCompare(a) => bloch_compare(a, cli, &meta),
    }
}

fn done(bytes: Vec<u8>) -> Result<Rendered, Failure> {
    Ok(Rendered {
        bytes,
        notes: Vec::new(),
    })
}

fn spectrum(a: &SpectrumArgs, cli: &Cli, meta: &Meta) -> Result<Rendered, Failure> {
    #[derive(Serialize)]
    struct Entry {
        #[serde(rename = "N")]
        side: usize,
        boundary: BoundaryArg,
        eigenvalues: Vec<Real>,
        #[serde(skip_serializing_if = "Option::is_none")]
        bloch: Option<Vec<Real>>,
    }
    let spectra = a
        .sizes
        .par_iter()
        .map(|&n| eigenvalues(&lattice(n, a.boundary, cli.gamma)?).map_err(Failure::from))
        .collect::<Result<Vec<_>, _>>()?;
    let blochs: Vec<Option<Vec<f64>>> = a
        .sizes
        .iter()
        .map(|&n| a.bloch.then(|| bloch_spectrum(n)))
        .collect();

    match cli.format {
        Format::Csv => {
            let mut header = vec!["N", "n", "lambda"];
            if a.bloch {
                header.extend(["bloch", "difference"]);
            }
            let mut csv = Csv::new(&header);
            for ((&n, values), bloch) in a.sizes.iter().zip(&spectra).zip(&blochs) {
                for (i, &v) in values.iter().enumerate() {
                    let mut row = vec![Cell::Int(n), Cell::Int(i + 1), Cell::Real(v)];
                    if let Some(b) = bloch {
                        row.extend([Cell::Real(b[i]), Cell::Real(b[i] - v)]);
                    }
                    csv.row(&row);
                }
            }
            done(csv.into_bytes())
        }
        Format::Json => {
            let data: Vec<Entry> = a
                .sizes
                .iter()
                .zip(&spectra)
                .zip(&blochs)
                .map(|((&n, v), b)| Entry {
                    side: n,
                    boundary: a.boundary,
                    eigenvalues: reals(v),
                    bloch: b.as_deref().map(reals),
                })
                .collect();
            done(json_document(meta, &data)?)
        }
    }
}

fn evolve(a: &EvolveArgs, cli: &Cli, meta: &Meta) -> Result<Rendered, Failure> {
    let side = a.size;
    let adjacency = lattice(side, a.boundary, cli.gamma)?;
    let j = resolve(a.source, side)?;
    let times = if a.times.is_empty() {
        time_grid(a.t_max, a.dt)?
    } else {
        a.times.clone()
    };

    let Some(target) = a.observe else {
        let eig = decompose(&adjacency)?;
        let fields = times
            .par_iter()
            .map(|&t| match a.kind {
                KindArg::Quantum => dynamics::quantum_field(&eig, j, t, cli.gamma),
                KindArg::Classical => dynamics::classical_field(&eig, j, t, cli.gamma),
            })
            .collect::<qwalk::Result<Vec<_>>>()?;
        return snapshots(&fields, a, cli, meta);
    };

    let k = resolve(target, side)?;
    let eig = decompose_rows(&adjacency, &[node_to_linear(j, side)?, node_to_linear(k, side)?])?;
    let series = match a.kind {
        KindArg::Quantum => transition_series(&eig, j, k, &times, cli.gamma)?,
        KindArg::Classical => classical_series(&eig, j, k, &times, cli.gamma)?,
    };
    let peak = first_peak(&series, DEFAULT_PEAK_FLOOR);
    let notes = match peak {
        Some(p) => vec![format!(
            "first peak: t={:.6} probability={:.6}",
            p.time, p.value
        )],
        None => vec!["first peak: none in the requested window".to_string()],
    };

    let bytes = match cli.format {
        Format::Csv => {
            let mut csv = Csv::new(&["t", "probability"]);
            for &(t, p) in &series {
                csv.row(&[Cell::Real(t), Cell::Real(prob(p))]);
            }
            csv.into_bytes()
        }
        Format::Json => {
            #[derive(Serialize)]
            struct PeakOut {
                time: Real,
                value: Real,
            }
            #[derive(Serialize)]
            struct Data {
                source: NodeOut,
                observe: NodeOut,
                t: Vec<Real>,
                probability: Vec<Real>,
                first_peak: Option<PeakOut>,
            }
            let data = Data {
                source: j.into(),
                observe: k.into(),
                t: series.iter().map(|p| Real(p.0)).collect(),
                probability: series.iter().map(|p| Real(prob(p.1))).collect(),
                first_peak: peak.map(|p| PeakOut {
                    time: Real(p.time),
                    value: Real(p.value),
                }),
            };
            json_document(meta, &data)?
        }
    };
    Ok(Rendered { bytes, notes })
}

fn grid(side: usize, values: &[f64]) -> Vec<Vec<Real>> {
    values
        .chunks(side)
        .map(|row| row.iter().map(|&v| Real(prob(v))).collect())
        .collect()
}

fn snapshots(fields: &[ProbabilityField], a: &EvolveArgs, cli: &Cli, meta: &Meta) -> Result<Rendered, Failure> {
    let side = a.size;
    match cli.format {
        Format::Csv => {
            let mut csv = Csv::new(&["t", "kx", "ky", "value"]);
            for f in fields {
                for (idx, &v) in f.values.iter().enumerate() {
                    csv.row(&[
                        Cell::Real(f.time),
                        Cell::Int(idx % side + 1),
                        Cell::Int(idx / side + 1),
                        Cell::Real(prob(v)),
                    ]);
                }
            }
            done(csv.into_bytes())
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Snapshot {
                t: Real,
                /// Rows indexed by `ky`, columns by `kx`.
                grid: Vec<Vec<Real>>,
            }
            #[derive(Serialize)]
            struct Data {
                source: NodeOut,
                kind: KindArg,
                snapshots: Vec<Snapshot>,
            }
            let data = Data {
                source: fields.first().map_or(NodeOut(0, 0), |f| f.source.into()),
                kind: a.kind,
                snapshots: fields
                    .iter()
                    .map(|f| Snapshot {
                        t: Real(f.time),
                        grid: grid(side, &f.values),
                    })
                    .collect(),
            };
            done(json_document(meta, &data)?)
        }
    }
}

fn limiting(a: &LimitingArgs, cli: &Cli, meta: &Meta) -> Result<Rendered, Failure> {
    let fields = a
        .sizes
        .par_iter()
        .map(|&side| -> Result<_, Failure> {
            let adjacency = lattice(side, a.boundary, cli.gamma)?;
            let j = resolve(a.source, side)?;
            let run = || -> qwalk::Result<_> {
                let eig = decompose(&adjacency)?;
                match a.method {
                    Method::Formula => {
                        let p = group_degeneracies(eig.values(), scaled_tau(&adjacency, a.tau))?;
                        limiting_field(&eig, &p, j)
                    }
                    Method::TimeAverage => limiting_by_time_average(&eig, j, a.t_max, a.dt, cli.gamma),
                }
            };
            Ok(run().map_err(|e| e.at_size(side))?)
        })
        .collect::<Result<Vec<_>, _>>()?;

    match cli.format {
        Format::Csv => {
            let mut csv = Csv::new(&["N", "kx", "ky", "chi"]);
            for f in &fields {
                for (idx, &v) in f.values.iter().enumerate() {
                    csv.row(&[
                        Cell::Int(f.side),
                        Cell::Int(idx % f.side + 1),
                        Cell::Int(idx / f.side + 1),
                        Cell::Real(prob(v)),
                    ]);
                }
            }
            done(csv.into_bytes())
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Entry {
                #[serde(rename = "N")]
                side: usize,
                source: NodeOut,
                method: Method,
                total: Real,
                grid: Vec<Vec<Real>>,
            }
            let data: Vec<Entry> = fields
                .iter()
                .map(|f| Entry {
                    side: f.side,
                    source: f.source.into(),
                    method: a.method,
                    total: Real(f.total()),
                    grid: grid(f.side, &f.values),
                })
                .collect();
            done(json_document(meta, &data)?)
        }
    }
}

fn scan(a: &ScanArgs, cli: &Cli, meta: &Meta) -> Result<Rendered, Failure> {
    let cfg = ScanConfig {
        rate: cli.gamma,
        eta: a.eta,
        relative_tau: a.tau,
        max_side: a.max_side,
    };
    let records = asymmetry_scan(a.n_min..=a.n_max, &cfg)?;
    let flagged: Vec<String> = records
        .iter()
        .filter(|r| r.asymmetric)
        .map(|r| r.side.to_string())
        .collect();
    let notes = vec![format!("asymmetric sizes: [{}]", flagged.join(", "))];
    let bytes = match cli.format {
        Format::Csv => {
            let mut buf = Vec::new();
            write_scan_csv(&records, &mut buf).map_err(|e| Failure::Io(e.to_string()))?;
            buf
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Entry {
                #[serde(rename = "N")]
                side: usize,
                chi_cc: Real,
                chi_oc: Real,
                diff_scaled: Real,
                asymmetric: bool,
                tolerance_sensitive: bool,
            }
            let data: Vec<Entry> = records
                .iter()
                .map(|r| Entry {
                    side: r.side,
                    chi_cc: Real(r.chi_cc),
                    chi_oc: Real(r.chi_oc),
                    diff_scaled: Real(r.diff_scaled),
                    asymmetric: r.asymmetric,
                    tolerance_sensitive: r.tolerance_sensitive,
                })
                .collect();
            json_document(meta, &data)?
        }
    };
    Ok(Rendered { bytes, notes })
}

#[derive(Serialize)]
struct FitOut {
    slope: Real,
    intercept: Real,
    residual: Real,
    points: usize,
}

impl From<&PowerLawFit> for FitOut {
    fn from(f: &PowerLawFit) -> Self {
        FitOut {
            slope: Real(f.slope),
            intercept: Real(f.intercept),
            residual: Real(f.residual),
            points: f.points,
        }
    }
}

fn scaling(a: &ScalingArgs, cli: &Cli, meta: &Meta) -> Result<Rendered, Failure> {
    let cfg = ScanConfig {
        rate: cli.gamma,
        relative_tau: a.tau,
        ..ScanConfig::default()
    };
    let report = scaling_series(&odd_sizes(a), &cfg)?;
    let notes = vec![format!(
        "log-log slopes: opposite corner {:.4}, middle {:.4}, classical {:.4}",
        report.opposite_corner_fit.slope, report.middle_fit.slope, report.classical_fit.slope
    )];
    let bytes = match cli.format {
        Format::Csv => {
            let mut buf = Vec::new();
            write_scaling_csv(&report.points, &mut buf).map_err(|e| Failure::Io(e.to_string()))?;
            buf
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Point {
                #[serde(rename = "N")]
                side: usize,
                chi_oc_c: Real,
                chi_m_m: Real,
                chi_classical: Real,
            }
            #[derive(Serialize)]
            struct Data {
                points: Vec<Point>,
                opposite_corner_fit: FitOut,
                middle_fit: FitOut,
                classical_fit: FitOut,
            }
            let data = Data {
                points: report
                    .points
                    .iter()
                    .map(|p| Point {
                        side: p.side,
                        chi_oc_c: Real(p.chi_oc_c),
                        chi_m_m: Real(p.chi_m_m),
                        chi_classical: Real(p.chi_classical),
                    })
                    .collect(),
                opposite_corner_fit: (&report.opposite_corner_fit).into(),
                middle_fit: (&report.middle_fit).into(),
                classical_fit: (&report.classical_fit).into(),
            };
            json_document(meta, &data)?
        }
    };
    Ok(Rendered { bytes, notes })
}

struct Comparison {
    side: usize,
    source: Node,
    target: Node,
    times: Vec<f64>,
    finite: Vec<f64>,
    pbc: Vec<f64>,
    pbc_return: Vec<f64>,
    bulk: Vec<f64>,
    onset: Option<dynamics::DeviationOnset>,
}

fn compare(side: usize, source: NodeSpec, a: &BlochArgs, gamma: f64) -> Result<Comparison, Failure> {
    let adjacency = lattice(side, BoundaryArg::Open, gamma)?;
    let j = resolve(source, side)?;
    let k = resolve(a.observe.unwrap_or(source), side)?;
    let times = time_grid(a.t_max, a.dt)?;
    let run = || -> qwalk::Result<Comparison> {
        let eig = decompose_rows(&adjacency, &[node_to_linear(j, side)?, node_to_linear(k, side)?])?;
        let finite = transition_series(&eig, j, k, &times, gamma)?;
        let mut pbc = Vec::with_capacity(times.len());
        let mut pbc_return = Vec::with_capacity(times.len());
        let mut bulk = Vec::with_capacity(times.len());
        for &t in &times {
            pbc.push(pbc_amplitude(side, j, k, t, gamma)?.norm_sqr());
            pbc_return.push(pbc_amplitude(side, k, k, t, gamma)?.norm_sqr());
            bulk.push(bloch::bulk_probability(j, k, t, gamma)?);
        }
        let onset = if j == k {
            compare_return_with_bulk(&eig, j, a.t_max, a.dt, gamma)?.onset(DEFAULT_ONSET_THRESHOLD)
        } else {
            None
        };
        Ok(Comparison {
            side,
            source: j,
            target: k,
            finite: finite.into_iter().map(|p| p.1).collect(),
            times: times.clone(),
            pbc,
            pbc_return,
            bulk,
            onset,
        })
    };
    Ok(run().map_err(|e| e.at_size(side))?)
}

fn bloch_compare(a: &BlochArgs, cli: &Cli, meta: &Meta) -> Result<Rendered, Failure> {
    let jobs: Vec<(usize, NodeSpec)> = a
        .sizes
        .iter()
        .flat_map(|&n| a.source.iter().map(move |&s| (n, s)))
        .collect();
    let comparisons = jobs
        .par_iter()
        .map(|&(n, s)| compare(n, s, a, cli.gamma))
        .collect::<Result<Vec<_>, _>>()?;

    let notes = comparisons
        .iter()
        .filter(|c| c.source == c.target)
        .map(|c| match c.onset {
            Some(o) => format!(
                "N={} source=({},{}): deviates from the infinite lattice by {:.0}% of its envelope at t={:.2} ({} it)",
                c.side,
                c.source.jx,
                c.source.jy,
                100.0 * DEFAULT_ONSET_THRESHOLD,
                o.time,
                if o.above_bulk { "above" } else { "below" }
            ),
            None => format!("N={}: no deviation onset within t-max", c.side),
        })
        .collect();

    let bytes = match cli.format {
        Format::Csv => {
            let mut csv = Csv::new(&["N", "jx", "jy", "kx", "ky", "t", "finite", "pbc", "pbc_return", "bulk"]);
            for c in &comparisons {
                for i in 0..c.times.len() {
                    csv.row(&[
                        Cell::Int(c.side),
                        Cell::Int(c.source.jx),
                        Cell::Int(c.source.jy),
                        Cell::Int(c.target.jx),
                        Cell::Int(c.target.jy),
                        Cell::Real(c.times[i]),
                        Cell::Real(prob(c.finite[i])),
                        Cell::Real(prob(c.pbc[i])),
                        Cell::Real(prob(c.pbc_return[i])),
                        Cell::Real(c.bulk[i]),
                    ]);
                }
            }
            csv.into_bytes()
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Entry {
                #[serde(rename = "N")]
                side: usize,
                source: NodeOut,
                observe: NodeOut,
                t: Vec<Real>,
                finite: Vec<Real>,
                pbc: Vec<Real>,
                pbc_return: Vec<Real>,
                bulk: Vec<Real>,
                onset_time: Option<Real>,
            }
            let data: Vec<Entry> = comparisons
                .iter()
                .map(|c| Entry {
                    side: c.side,
                    source: c.source.into(),
                    observe: c.target.into(),
                    t: reals(&c.times),
                    finite: c.finite.iter().map(|&v| Real(prob(v))).collect(),
                    pbc: c.pbc.iter().map(|&v| Real(prob(v))).collect(),
                    pbc_return: c.pbc_return.iter().map(|&v| Real(prob(v))).collect(),
                    bulk: reals(&c.bulk),
                    onset_time: c.onset.map(|o| Real(o.time)),
                })
                .collect();
            json_document(meta, &data)?
        }
    };
    Ok(Rendered { bytes, notes })
}
