//! One function per subcommand, each returning the finished document.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::Serialize;

use gcantor_core::classify::{classify, effective_level, spec_digest, CertStatus, LevelCertificate};
use gcantor_core::hyperbolic::{
    bounds_csv, curve_bounds, hexagon_seam, level_bounds, lower_bound_paper, pants_seam_distance,
    upper_bound_paper_channels, LevelBounds,
};
use gcantor_core::numerics::parse_rational;
use gcantor_core::seqspec::SpecDoc;
use gcantor_core::{CantorTree, CurveId, LengthBounds, Magnitude, Real, SequenceSpec, Verdict};

use crate::report::{csv_preamble, to_json, Enclosure};
use crate::{CliError, Command, Format, RunConfig};

pub(crate) struct Document {
    pub text: String,
    /// Reason the result counts as inconclusive for `--require-verdict`.
    pub inconclusive: Option<String>,
}

impl Document {
    fn done(text: String) -> Document {
        Document { text, inconclusive: None }
    }
}

struct Loaded {
    spec: SequenceSpec,
    digest: String,
    prec: u32,
}

fn load(cfg: &RunConfig) -> Result<Loaded, CliError> {
    let path = cfg.spec.as_ref().ok_or_else(|| CliError::Usage("--spec PATH is required".into()))?;
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let spec = SequenceSpec::parse(&text)?;
    spec.validate(u64::from(cfg.horizon.max(cfg.levels + 1)), cfg.precision)?;
    Ok(Loaded { digest: spec_digest(&spec, cfg.precision), spec, prec: cfg.precision })
}

pub(crate) fn execute(cmd: Command, cfg: &RunConfig) -> Result<Document, CliError> {
    let ctx = load(cfg)?;
    match cmd {
        Command::SpecValidate => spec_validate(&ctx, cfg),
        Command::Cantor => cantor(&ctx, cfg),
        Command::Bounds => bounds(&ctx, cfg),
        Command::Classify => classify_cmd(&ctx, cfg),
        Command::Thresholds => thresholds(&ctx, cfg),
        Command::Pants => pants(&ctx, cfg),
        Command::Plotdata => plotdata(&ctx, cfg),
    }
}

fn format_or(cfg: &RunConfig, default: Format) -> Format {
    cfg.format.unwrap_or(default)
}

fn parse_k(cfg: &RunConfig, prec: u32) -> Result<Real, CliError> {
    Real::parse(&cfg.k, prec).map_err(|e| CliError::Usage(format!("--K: {e}")))
}

fn mag_text(m: &Magnitude) -> String {
    match m {
        Magnitude::Scalar(x) => x.to_string(),
        Magnitude::Log(v) => format!("exp({})", v.log_value()),
    }
}

// spec-validate

#[derive(Serialize)]
struct ValidateDoc<'a> {
    spec_digest: &'a str,
    precision_bits: u32,
    horizon: u32,
    family: &'a str,
    valid: bool,
    spec: SpecDoc,
}

fn spec_validate(ctx: &Loaded, cfg: &RunConfig) -> Result<Document, CliError> {
    let family = ctx.spec.family_name();
    let checked = cfg.horizon.max(cfg.levels + 1);
    let text = match format_or(cfg, Format::Json) {
        Format::Json => to_json(&ValidateDoc {
            spec_digest: &ctx.digest,
            precision_bits: ctx.prec,
            horizon: checked,
            family,
            valid: true,
            spec: ctx.spec.to_doc(),
        }),
        Format::Csv => format!(
            "{}spec_digest,precision_bits,horizon,family,valid\n{},{},{},{},true\n",
            csv_preamble(&ctx.digest, ctx.prec),
            ctx.digest,
            ctx.prec,
            checked,
            family
        ),
        Format::Text => format!(
            "valid {family} spec (checked n <= {checked})\nspec_digest {}\nprecision_bits {}\ncanonical {}\n",
            ctx.digest,
            ctx.prec,
            ctx.spec.canonical_json()
        ),
    };
    Ok(Document::done(text))
}

// cantor

#[derive(Serialize)]
struct CantorDoc<'a> {
    spec_digest: &'a str,
    precision_bits: u32,
    levels: Vec<CantorLevelDoc>,
}

#[derive(Serialize)]
struct CantorLevelDoc {
    n: u32,
    degenerate: bool,
    q: Enclosure,
    length: Enclosure,
    gap: Enclosure,
    intervals: Vec<IntervalDoc>,
}

#[derive(Serialize)]
struct IntervalDoc {
    i: u64,
    left: Enclosure,
    right: Enclosure,
}

fn cantor(ctx: &Loaded, cfg: &RunConfig) -> Result<Document, CliError> {
    let tree = CantorTree::build(&ctx.spec, cfg.levels, ctx.prec)?;
    let text = match format_or(cfg, Format::Csv) {
        Format::Csv => csv_preamble(&ctx.digest, ctx.prec) + &tree.to_csv(cfg.levels)?,
        Format::Json => {
            let mut levels = Vec::new();
            for n in 1..=cfg.levels {
                let shape = tree.shape(n)?;
                let level = tree.level(n)?;
                let intervals = (1u64..)
                    .zip(&level.intervals)
                    .map(|(i, (l, r))| IntervalDoc { i, left: Enclosure::real(l), right: Enclosure::real(r) })
                    .collect();
                levels.push(CantorLevelDoc {
                    n,
                    degenerate: shape.degenerate,
                    q: Enclosure::magnitude(&shape.q),
                    length: Enclosure::real(&shape.length),
                    gap: Enclosure::real(&shape.gap),
                    intervals,
                });
            }
            to_json(&CantorDoc { spec_digest: &ctx.digest, precision_bits: ctx.prec, levels })
        }
        Format::Text => {
            let mut s = format!("precision_bits {}\n", ctx.prec);
            for n in 1..=cfg.levels {
                let shape = tree.shape(n)?;
                let flag = if shape.degenerate { "  degenerate" } else { "" };
                writeln!(
                    s,
                    "level {n}: q {}  |I| {}  gap {}{flag}",
                    mag_text(&shape.q),
                    shape.length,
                    shape.gap
                )
                .unwrap();
            }
            s
        }
    };
    Ok(Document::done(text))
}

// bounds

#[derive(Serialize)]
struct CandidateDoc {
    method: &'static str,
    value: Enclosure,
}

#[derive(Serialize)]
struct BoundsRow {
    n: u32,
    i: u64,
    lower: Enclosure,
    lower_method: &'static str,
    lower_trivial: bool,
    upper: Option<Enclosure>,
    upper_method: Option<&'static str>,
    candidates: Vec<CandidateDoc>,
}

impl BoundsRow {
    fn new(b: &LengthBounds) -> BoundsRow {
        BoundsRow {
            n: b.curve.n,
            i: b.curve.i,
            lower: Enclosure::real(&b.lower.value),
            lower_method: b.lower_method().as_str(),
            lower_trivial: b.lower.trivial,
            upper: b.upper.as_ref().map(Enclosure::magnitude),
            upper_method: b.upper_method.map(|m| m.as_str()),
            candidates: b
                .candidates
                .iter()
                .map(|c| CandidateDoc { method: c.method.as_str(), value: Enclosure::magnitude(&c.value) })
                .collect(),
        }
    }
}

#[derive(Serialize)]
struct BoundsDoc<'a> {
    spec_digest: &'a str,
    precision_bits: u32,
    levels: u32,
    bounds: Vec<BoundsRow>,
}

/// Curves with the same level and the same unordered pair of adjacent gap
/// levels have identical bounds; `None` marks the unbounded side of an
/// outermost curve.
type CurveKey = (u32, Option<u32>, Option<u32>);

struct BoundsCache<'a> {
    ctx: &'a Loaded,
    tree: &'a CantorTree,
    map: HashMap<CurveKey, LengthBounds>,
}

impl<'a> BoundsCache<'a> {
    fn new(ctx: &'a Loaded, tree: &'a CantorTree) -> Self {
        BoundsCache { ctx, tree, map: HashMap::new() }
    }

    fn key(&self, curve: CurveId) -> Result<CurveKey, CliError> {
        let (l, r) = self.tree.gaps(curve.n, curve.i)?;
        let mut sides = [l.map(|g| g.level), r.map(|g| g.level)];
        sides.sort();
        Ok((curve.n, sides[0], sides[1]))
    }

    fn get(&mut self, curve: CurveId) -> Result<LengthBounds, CliError> {
        let key = self.key(curve)?;
        let bounds = match self.map.get(&key) {
            Some(b) => b.clone(),
            None => {
                let b = curve_bounds(&self.ctx.spec, self.tree, curve, self.ctx.prec)?;
                self.map.insert(key, b.clone());
                b
            }
        };
        Ok(LengthBounds { curve, ..bounds })
    }
}

fn all_curves(levels: u32) -> impl Iterator<Item = CurveId> {
    (1..=levels).flat_map(|n| (1..=1u64 << n).map(move |i| CurveId { n, i }))
}

fn bounds(ctx: &Loaded, cfg: &RunConfig) -> Result<Document, CliError> {
    let tree = CantorTree::build(&ctx.spec, cfg.levels, ctx.prec)?;
    // Listing every curve shares the interval-listing cap.
    tree.level(cfg.levels)?;
    let mut cache = BoundsCache::new(ctx, &tree);
    let rows = all_curves(cfg.levels).map(|c| cache.get(c)).collect::<Result<Vec<_>, _>>()?;
    let text = match format_or(cfg, Format::Csv) {
        Format::Csv => csv_preamble(&ctx.digest, ctx.prec) + &bounds_csv(&rows),
        Format::Json => to_json(&BoundsDoc {
            spec_digest: &ctx.digest,
            precision_bits: ctx.prec,
            levels: cfg.levels,
            bounds: rows.iter().map(BoundsRow::new).collect(),
        }),
        Format::Text => {
            let mut s = format!("precision_bits {}\n", ctx.prec);
            for b in &rows {
                let upper = match (&b.upper, b.upper_method) {
                    (Some(u), Some(m)) => format!("{} ({m})", mag_text(u)),
                    _ => "none".to_string(),
                };
                writeln!(s, "{}  lower {}  upper {upper}", b.curve, b.lower.value).unwrap();
            }
            s
        }
    };
    Ok(Document::done(text))
}

// classify

#[derive(Serialize)]
struct CriterionDoc {
    n: u64,
    lo: Option<String>,
    hi: Option<String>,
    log_scale: bool,
    defined: bool,
    negative: bool,
    closed_form: bool,
}

#[derive(Serialize)]
struct UncountableDoc {
    certified: bool,
    certificate: Option<String>,
    notes: Vec<String>,
}

#[derive(Serialize)]
struct CountableDoc {
    certified: bool,
    certificate: Option<String>,
    increasing_from: Option<u64>,
    notes: Vec<String>,
}

#[derive(Serialize)]
struct ThresholdSummary {
    #[serde(rename = "K")]
    k: Enclosure,
    n1: Option<u32>,
    n2: Option<u32>,
    #[serde(rename = "N")]
    big_n: Option<u32>,
}

#[derive(Serialize)]
struct LevelBoundsDoc {
    n: u32,
    lower: Enclosure,
    worst_upper: Option<Enclosure>,
    representatives: Vec<BoundsRow>,
}

impl LevelBoundsDoc {
    fn new(level: &LevelBounds) -> LevelBoundsDoc {
        LevelBoundsDoc {
            n: level.n,
            lower: Enclosure::real(&level.lower.value),
            worst_upper: level.worst_upper.as_ref().map(Enclosure::magnitude),
            representatives: level.representatives.iter().map(BoundsRow::new).collect(),
        }
    }
}

#[derive(Serialize)]
struct ClassifyDoc<'a> {
    spec_digest: &'a str,
    precision_bits: u32,
    horizon: u64,
    verdict: Verdict,
    c: String,
    witnesses: Vec<u64>,
    short_geodesic_bound: Enclosure,
    uncountable: UncountableDoc,
    criterion_values: Vec<CriterionDoc>,
    countable: CountableDoc,
    thresholds: ThresholdSummary,
    bounds: Vec<LevelBoundsDoc>,
    notes: Vec<String>,
}

fn classify_cmd(ctx: &Loaded, cfg: &RunConfig) -> Result<Document, CliError> {
    let c = parse_rational(&cfg.c).map_err(|e| CliError::Usage(format!("--c: {e}")))?;
    let k = parse_k(cfg, ctx.prec)?;
    let report = classify(&ctx.spec, u64::from(cfg.horizon), &c, ctx.prec)?;
    let th = effective_level(&ctx.spec, &k, cfg.horizon, ctx.prec)?;
    let tree = CantorTree::build(&ctx.spec, cfg.levels, ctx.prec)?;
    let levels = (1..=cfg.levels)
        .map(|n| level_bounds(&ctx.spec, &tree, n, ctx.prec))
        .collect::<Result<Vec<_>, _>>()?;

    let criterion_values: Vec<CriterionDoc> = report
        .countable
        .values
        .iter()
        .map(|v| {
            let enc = v.value.as_ref().map(Enclosure::magnitude);
            CriterionDoc {
                n: v.n,
                lo: enc.as_ref().map(|e| e.lo.clone()),
                hi: enc.as_ref().map(|e| e.hi.clone()),
                log_scale: enc.as_ref().is_some_and(|e| e.log_scale),
                defined: enc.is_some(),
                negative: v.is_negative(),
                closed_form: v.closed_form,
            }
        })
        .collect();
    let inconclusive = (report.verdict == Verdict::Unknown)
        .then(|| format!("verdict Unknown within horizon {}", report.horizon));

    let text = match format_or(cfg, Format::Json) {
        Format::Json => to_json(&ClassifyDoc {
            spec_digest: &ctx.digest,
            precision_bits: ctx.prec,
            horizon: report.horizon,
            verdict: report.verdict,
            c: report.uncountable.c.to_string(),
            witnesses: report.uncountable.witnesses.clone(),
            short_geodesic_bound: Enclosure::real(&report.uncountable.short_geodesic_bound),
            uncountable: UncountableDoc {
                certified: report.uncountable.certified,
                certificate: report.uncountable.certificate.as_ref().map(ToString::to_string),
                notes: report.uncountable.notes.clone(),
            },
            criterion_values,
            countable: CountableDoc {
                certified: report.countable.certified,
                certificate: report.countable.certificate.as_ref().map(ToString::to_string),
                increasing_from: report.countable.increasing_from,
                notes: report.countable.notes.clone(),
            },
            thresholds: ThresholdSummary { k: Enclosure::real(&th.k), n1: th.n1, n2: th.n2, big_n: th.big_n },
            bounds: levels.iter().map(LevelBoundsDoc::new).collect(),
            notes: report.notes.clone(),
        }),
        Format::Csv => {
            let mut s = csv_preamble(&ctx.digest, ctx.prec);
            writeln!(s, "# verdict={}", report.verdict).unwrap();
            s.push_str("n,lo,hi,log_scale,defined,negative,closed_form\n");
            for v in &criterion_values {
                writeln!(
                    s,
                    "{},{},{},{},{},{},{}",
                    v.n,
                    v.lo.as_deref().unwrap_or(""),
                    v.hi.as_deref().unwrap_or(""),
                    u8::from(v.log_scale),
                    u8::from(v.defined),
                    u8::from(v.negative),
                    u8::from(v.closed_form)
                )
                .unwrap();
            }
            s
        }
        Format::Text => {
            let mut s = format!("verdict {}\n", report.verdict);
            writeln!(s, "precision_bits {}  horizon {}", ctx.prec, report.horizon).unwrap();
            writeln!(s, "c {}  witnesses {:?}", report.uncountable.c, report.uncountable.witnesses).unwrap();
            writeln!(s, "increasing_from {:?}", report.countable.increasing_from).unwrap();
            writeln!(s, "K {}  n1 {:?}  n2 {:?}  N {:?}", cfg.k, th.n1, th.n2, th.big_n).unwrap();
            for note in &report.notes {
                writeln!(s, "note: {note}").unwrap();
            }
            s
        }
    };
    Ok(Document { text, inconclusive })
}

// thresholds

#[derive(Serialize)]
struct CertDoc {
    kind: &'static str,
    n: u32,
    lhs: Option<Enclosure>,
    rhs: Enclosure,
    status: CertStatus,
}

#[derive(Serialize)]
struct ThresholdsDoc<'a> {
    spec_digest: &'a str,
    precision_bits: u32,
    horizon: u32,
    #[serde(rename = "K")]
    k: Enclosure,
    n1: Option<u32>,
    n2: Option<u32>,
    #[serde(rename = "N")]
    big_n: Option<u32>,
    certificates: Vec<CertDoc>,
}

fn status_str(s: CertStatus) -> &'static str {
    match s {
        CertStatus::Certified => "certified",
        CertStatus::Straddles => "straddles",
        CertStatus::Fails => "fails",
        CertStatus::Unavailable => "unavailable",
    }
}

fn thresholds(ctx: &Loaded, cfg: &RunConfig) -> Result<Document, CliError> {
    let k = parse_k(cfg, ctx.prec)?;
    let th = effective_level(&ctx.spec, &k, cfg.horizon, ctx.prec)?;
    let tag = |kind: &'static str, certs: &[LevelCertificate]| {
        certs
            .iter()
            .map(|c| CertDoc {
                kind,
                n: c.n,
                lhs: c.lhs.as_ref().map(Enclosure::real),
                rhs: Enclosure::real(&c.rhs),
                status: c.status,
            })
            .collect::<Vec<_>>()
    };
    let mut certificates = tag("n1", &th.n1_certificates);
    certificates.extend(tag("n2", &th.n2_certificates));
    let inconclusive = th.big_n.is_none().then(|| format!("N not reached within horizon {}", th.horizon));

    let text = match format_or(cfg, Format::Json) {
        Format::Json => to_json(&ThresholdsDoc {
            spec_digest: &ctx.digest,
            precision_bits: ctx.prec,
            horizon: th.horizon,
            k: Enclosure::real(&th.k),
            n1: th.n1,
            n2: th.n2,
            big_n: th.big_n,
            certificates,
        }),
        Format::Csv => {
            let mut s = csv_preamble(&ctx.digest, ctx.prec);
            s.push_str("kind,n,lhs_lo,lhs_hi,rhs_lo,rhs_hi,status\n");
            for c in &certificates {
                let (llo, lhi) = c.lhs.as_ref().map_or(("", ""), |e| (e.lo.as_str(), e.hi.as_str()));
                writeln!(s, "{},{},{llo},{lhi},{},{}", c.kind, c.n, c.rhs.csv_pair(), status_str(c.status)).unwrap();
            }
            s
        }
        Format::Text => {
            let show = |v: Option<u32>| v.map_or_else(|| format!("absent (n <= {})", th.horizon), |n| n.to_string());
            format!(
                "K {}  precision_bits {}\nn1 {}\nn2 {}\nN  {}\n",
                cfg.k,
                ctx.prec,
                show(th.n1),
                show(th.n2),
                show(th.big_n)
            )
        }
    };
    Ok(Document { text, inconclusive })
}

// pants

#[derive(Clone, Serialize)]
struct PantsRow {
    n: u32,
    i: u64,
    a: Enclosure,
    b: Enclosure,
    c: Enclosure,
    seam: Option<Enclosure>,
    distance: Option<Enclosure>,
    status: &'static str,
    note: Option<String>,
}

#[derive(Serialize)]
struct PantsDoc<'a> {
    spec_digest: &'a str,
    precision_bits: u32,
    levels: u32,
    pants: Vec<PantsRow>,
}

fn pants_row(cache: &mut BoundsCache, pants: CurveId) -> Result<PantsRow, CliError> {
    let child = |i| CurveId { n: pants.n + 1, i };
    let a = cache.get(pants)?.length_interval();
    let b = cache.get(child(2 * pants.i - 1))?.length_interval();
    let c = cache.get(child(2 * pants.i))?.length_interval();
    let computed = hexagon_seam(&a, &b, &c).and_then(|s| Ok((s, pants_seam_distance(&a, &b, &c)?)));
    let (seam, distance, status, note) = match computed {
        Ok((s, d)) => (Some(Enclosure::real(&s)), Some(Enclosure::real(&d)), "ok", None),
        Err(e) => (None, None, "unavailable", Some(e.to_string())),
    };
    Ok(PantsRow {
        n: pants.n,
        i: pants.i,
        a: Enclosure::real(&a),
        b: Enclosure::real(&b),
        c: Enclosure::real(&c),
        seam,
        distance,
        status,
        note,
    })
}

fn pants(ctx: &Loaded, cfg: &RunConfig) -> Result<Document, CliError> {
    let tree = CantorTree::build(&ctx.spec, cfg.levels + 1, ctx.prec)?;
    tree.level(cfg.levels)?;
    let mut cache = BoundsCache::new(ctx, &tree);
    let mut memo: HashMap<(CurveKey, CurveKey, CurveKey), PantsRow> = HashMap::new();
    let mut rows = Vec::new();
    for p in all_curves(cfg.levels) {
        let key = (
            cache.key(p)?,
            cache.key(CurveId { n: p.n + 1, i: 2 * p.i - 1 })?,
            cache.key(CurveId { n: p.n + 1, i: 2 * p.i })?,
        );
        let row = match memo.get(&key) {
            Some(r) => PantsRow { n: p.n, i: p.i, ..r.clone() },
            None => {
                let r = pants_row(&mut cache, p)?;
                memo.insert(key, r.clone());
                r
            }
        };
        rows.push(row);
    }
    let text = match format_or(cfg, Format::Csv) {
        Format::Csv => {
            let mut s = csv_preamble(&ctx.digest, ctx.prec);
            s.push_str("n,i,a_lo,a_hi,b_lo,b_hi,c_lo,c_hi,seam_lo,seam_hi,distance_lo,distance_hi,status\n");
            for r in &rows {
                let opt = |e: &Option<Enclosure>| e.as_ref().map_or_else(|| ",".to_string(), Enclosure::csv_pair);
                writeln!(
                    s,
                    "{},{},{},{},{},{},{},{}",
                    r.n,
                    r.i,
                    r.a.csv_pair(),
                    r.b.csv_pair(),
                    r.c.csv_pair(),
                    opt(&r.seam),
                    opt(&r.distance),
                    r.status
                )
                .unwrap();
            }
            s
        }
        Format::Json => to_json(&PantsDoc { spec_digest: &ctx.digest, precision_bits: ctx.prec, levels: cfg.levels, pants: rows }),
        Format::Text => {
            let mut s = format!("precision_bits {}\n", ctx.prec);
            for r in &rows {
                let d = r.distance.as_ref().map_or_else(|| r.status.to_string(), |e| format!("[{}, {}]", e.lo, e.hi));
                writeln!(s, "P_{}^{}  distance {d}", r.n, r.i).unwrap();
            }
            s
        }
    };
    Ok(Document::done(text))
}

// plotdata

fn plotdata(ctx: &Loaded, cfg: &RunConfig) -> Result<Document, CliError> {
    if format_or(cfg, Format::Csv) != Format::Csv {
        return Err(CliError::Usage("plotdata emits CSV only".into()));
    }
    let mut series: Vec<(String, u64, Enclosure)> = Vec::new();
    let mut push = |name: &str, n: u64, e: Enclosure| {
        let name = if e.log_scale { format!("{name}_log") } else { name.to_string() };
        series.push((name, n, e));
    };
    for n in 1..=u64::from(cfg.horizon) {
        let ch = ctx.spec.eval_log_channels(n, ctx.prec)?;
        push("ln_inv_q", n, Enclosure::magnitude(&ch.lambda));
        if let Some(v) = ctx.spec.criterion(n, ctx.prec)?.value {
            push("criterion", n, Enclosure::magnitude(&v));
        }
        push("lower_bound", n, Enclosure::real(&lower_bound_paper(&ch)?.value));
        push("ln_upper_bound", n, Enclosure::real(&upper_bound_paper_channels(&ch)?.ln()));
    }
    // Group rows by series, keeping first-appearance order of the names.
    let mut order: Vec<String> = Vec::new();
    for (name, _, _) in &series {
        if !order.contains(name) {
            order.push(name.clone());
        }
    }
    let mut s = csv_preamble(&ctx.digest, ctx.prec);
    s.push_str("n,value_lo,value_hi,series\n");
    for name in &order {
        for (_, n, e) in series.iter().filter(|(m, _, _)| m == name) {
            writeln!(s, "{n},{},{name}", e.csv_pair()).unwrap();
        }
    }
    Ok(Document::done(s))
}
