use clap::{Args, Parser, Subcommand, ValueEnum};
use fracurv::curvature::{fractal_integral, parallel_set, write_records_csv, Policy};
use fracurv::diagnostics::{cbc_pairwise_scan, ladder, scbc_scan, PairRegion, ScanSeries};
use fracurv::fmt::round_json;
use fracurv::ifs::{presets, Ifs, Word};
use fracurv::oracles::CantorSquareParams;
use fracurv::oracles::{
    cantor_alpha, cantor_c0var, cantor_n, koch_constants, uset_band, uset_c0var, uset_pairs,
};
use fracurv::raster::io::to_svg_highlight;
use fracurv::words::{neighbor_tree, neighbors, preset_sosc, sigma, sigma_b};
use fracurv::{Error, Result};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "fracurv",
    version,
    about = "Curvature measures of parallel sets of planar self-similar sets"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// CSV of C_0, C_1, C_2 and C_0^var of F_eps over an eps ladder.
    Analyze(Settings),
    /// SCBC pair scan or pairwise CBC scan; verdict JSON on stdout, series CSV to --out.
    Scan {
        kind: ScanWhich,
        #[command(flatten)]
        s: Settings,
    },
    /// Average and integral estimates of the fractal curvature C_k^f.
    Fractal(Settings),
    /// Closed-form values for the presets at --eps.
    Oracle(Settings),
    /// SVG of the boundary of F_eps, optionally marking a pair region.
    Render(Settings),
    /// Σ(eps), Σ_b(eps) with --boundary, or the neighbours of --word in Σ(lambda eps).
    DumpWords(Settings),
}

#[derive(Clone, Copy, ValueEnum)]
enum ScanWhich {
    Scbc,
    Cbc,
}

/// Flags; a JSON file given by --config overrides any of them.
#[derive(Args, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Settings {
    /// koch, uset, cantor-square or square.
    #[arg(long)]
    preset: Option<String>,
    /// Corner size of the cantor-square preset.
    #[arg(long)]
    p: Option<f64>,
    /// IFS description in JSON.
    #[arg(long)]
    ifs: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing)]
    config: Option<PathBuf>,
    #[arg(long)]
    eps_min: Option<f64>,
    #[arg(long)]
    eps_max: Option<f64>,
    /// Ladder points per decade.
    #[arg(long)]
    ppd: Option<f64>,
    /// Single scale for oracle, render and dump-words.
    #[arg(long)]
    eps: Option<f64>,
    /// Grid step as a fraction of eps.
    #[arg(long)]
    h_ratio: Option<f64>,
    /// A number or "auto" for lambda_min.
    #[arg(long)]
    lambda: Option<String>,
    /// Pair of first-level indices, e.g. 1,2.
    #[arg(long)]
    pair: Option<String>,
    #[arg(long)]
    k: Option<usize>,
    /// Lower end of the averaging range for fractal.
    #[arg(long)]
    delta: Option<f64>,
    /// Use Σ_b instead of Σ in dump-words.
    #[arg(long)]
    #[serde(default)]
    boundary: bool,
    /// Word whose neighbours dump-words lists, e.g. 1,2,2.
    #[arg(long)]
    word: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Verdict JSON path for scan (stdout otherwise).
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
}

impl Settings {
    fn resolve(self) -> Result<Settings> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let text = std::fs::read_to_string(&path)?;
        let over: Value = serde_json::from_str(&text)?;
        let Value::Object(over) = over else {
            return Err(Error::Config(format!(
                "{} must hold a JSON object",
                path.display()
            )));
        };
        let mut base = serde_json::to_value(&self)?;
        let obj = base
            .as_object_mut()
            .expect("settings serialize to an object");
        for (k, v) in over {
            obj.insert(k, v);
        }
        serde_json::from_value(base).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    fn ifs(&self) -> Result<Ifs> {
        match (&self.preset, &self.ifs) {
            (Some(_), Some(_)) => Err(Error::Config(
                "give either --preset or --ifs, not both".into(),
            )),
            (Some(name), None) => presets::by_name(name, self.p),
            (None, Some(path)) => Ifs::from_json_file(path),
            (None, None) => Err(Error::Config("missing --preset or --ifs".into())),
        }
    }

    fn policy(&self) -> Result<Policy> {
        self.h_ratio.map_or(Ok(Policy::default()), Policy::new)
    }

    fn ladder(&self, ifs: &Ifs) -> Result<Vec<f64>> {
        let eps_max = self.eps_max.unwrap_or(ifs.big_r);
        let eps_min = self.eps_min.unwrap_or(1e-3 * eps_max);
        ladder(eps_min, eps_max, self.ppd.unwrap_or(12.0), ifs.big_r)
    }

    fn eps(&self) -> Result<f64> {
        self.eps
            .ok_or_else(|| Error::Config("missing --eps".into()))
    }

    fn pair(&self) -> Result<(u16, u16)> {
        let text = self.pair.as_deref().unwrap_or("1,2");
        let w = parse_word(text)?;
        match w.0[..] {
            [i, j] => Ok((i, j)),
            _ => Err(Error::Config(format!(
                "--pair needs two indices, got '{text}'"
            ))),
        }
    }

    fn lambda(&self, ifs: &Ifs) -> Result<f64> {
        match self.lambda.as_deref() {
            None | Some("auto") => Ok(preset_sosc(ifs)?.lambda_min),
            Some(x) => x.parse().map_err(|_| {
                Error::Config(format!("--lambda must be a number or auto, got '{x}'"))
            }),
        }
    }

    fn writer(&self) -> Result<Box<dyn Write>> {
        Ok(match &self.out {
            Some(p) => Box::new(BufWriter::new(File::create(p)?)),
            None => Box::new(BufWriter::new(std::io::stdout().lock())),
        })
    }
}

fn parse_word(text: &str) -> Result<Word> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<u16>()
                .map_err(|_| Error::Config(format!("bad index list '{text}'")))
        })
        .collect::<Result<Vec<_>>>()
        .map(Word)
}

fn emit_json(mut v: Value, out: &mut dyn Write) -> Result<()> {
    round_json(&mut v);
    serde_json::to_writer_pretty(&mut *out, &v)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn analyze(s: &Settings) -> Result<()> {
    let ifs = s.ifs()?;
    let policy = s.policy()?;
    let records = s
        .ladder(&ifs)?
        .iter()
        .map(|&eps| parallel_set(&ifs, eps, &policy).map(|ps| ps.record()))
        .collect::<Result<Vec<_>>>()?;
    write_records_csv(&records, s.writer()?)
}

fn scan(kind: ScanWhich, s: &Settings) -> Result<()> {
    let ifs = s.ifs()?;
    let policy = s.policy()?;
    let eps = s.ladder(&ifs)?;
    let series: ScanSeries = match kind {
        ScanWhich::Scbc => {
            let (i, j) = s.pair()?;
            for x in [i, j] {
                ifs.check_word(&Word(vec![x]))?;
            }
            scbc_scan(&ifs, i, j, &eps, &policy)?
        }
        ScanWhich::Cbc => cbc_pairwise_scan(&ifs, s.lambda(&ifs)?, &eps, &policy)?,
    };
    if let Some(p) = &s.out {
        series.write_csv(BufWriter::new(File::create(p)?))?;
    }
    for (e, msg) in &series.dropped {
        eprintln!("warning: dropped eps = {e}: {msg}");
    }
    let mut out: Box<dyn Write> = match &s.json {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(std::io::stdout().lock()),
    };
    emit_json(series.verdict_json(), &mut out)
}

fn fractal(s: &Settings) -> Result<()> {
    let ifs = s.ifs()?;
    let k = s.k.unwrap_or(0);
    if k > 2 {
        return Err(Error::Config(format!("--k must be 0, 1 or 2, got {k}")));
    }
    let delta = s.delta.unwrap_or(1e-4);
    let est = fractal_integral(&ifs, k, delta, &s.policy()?)?;
    for w in &est.warnings {
        eprintln!("warning: {w}");
    }
    emit_json(serde_json::to_value(&est)?, &mut s.writer()?)
}

fn oracle(s: &Settings) -> Result<()> {
    let name = s
        .preset
        .as_deref()
        .ok_or_else(|| Error::Config("oracle needs --preset".into()))?;
    let v = match name {
        "cantor-square" => {
            let eps = s.eps()?;
            let c = CantorSquareParams::new(s.p.unwrap_or(1.0 / 3.0))?;
            json!({
                "preset": name, "p": c.p, "g": c.g, "s": c.s, "eps": eps,
                "N": cantor_n(&c, eps)?, "alpha": cantor_alpha(&c, eps)?, "c0_var": cantor_c0var(&c, eps)?,
            })
        }
        "uset" => {
            let eps = s.eps()?;
            json!({
                "preset": name, "eps": eps, "m": uset_band(eps)?, "J": uset_pairs(eps)?, "c0_var": uset_c0var(eps)?,
            })
        }
        "koch" => {
            let mut v = serde_json::to_value(koch_constants())?;
            v["preset"] = json!(name);
            v
        }
        other => return Err(Error::Config(format!("no oracle for preset '{other}'"))),
    };
    emit_json(v, &mut s.writer()?)
}

fn render(s: &Settings) -> Result<()> {
    let ifs = s.ifs()?;
    let eps = s.eps()?;
    if !(eps > 0.0 && eps < ifs.big_r) {
        return Err(Error::Domain(format!(
            "eps = {eps} outside (0, R = {})",
            ifs.big_r
        )));
    }
    let policy = s.policy()?;
    let ps = parallel_set(&ifs, eps, &policy)?;
    let svg = match &s.pair {
        Some(_) => {
            let (i, j) = s.pair()?;
            let region = PairRegion::new(&ifs, &Word(vec![i]), &Word(vec![j]), eps, &policy)?;
            to_svg_highlight(&ps.polys, |p| region.contains(p))
        }
        None => to_svg_highlight(&ps.polys, |_| false),
    };
    let mut out: Box<dyn Write> = match s.svg.as_ref().or(s.out.as_ref()) {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(std::io::stdout().lock()),
    };
    out.write_all(svg.as_bytes())?;
    out.flush()?;
    Ok(())
}

fn dump_words(s: &Settings) -> Result<()> {
    let ifs = s.ifs()?;
    let eps = s.eps()?;
    let v = match &s.word {
        Some(text) => {
            let w = parse_word(text)?;
            ifs.check_word(&w)?;
            let lambda = s.lambda(&ifs)?;
            let tree = neighbor_tree(&ifs, eps);
            let ns = neighbors(&ifs, &tree, eps, lambda, &w)?;
            json!({ "epsilon": eps, "lambda": lambda, "word": w, "neighbors": ns })
        }
        None if s.boundary => serde_json::to_value(sigma_b(&ifs, eps)?)?,
        None => serde_json::to_value(sigma(&ifs, eps)?)?,
    };
    emit_json(v, &mut s.writer()?)
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Analyze(s) => analyze(&s.resolve()?),
        Cmd::Scan { kind, s } => scan(kind, &s.resolve()?),
        Cmd::Fractal(s) => fractal(&s.resolve()?),
        Cmd::Oracle(s) => oracle(&s.resolve()?),
        Cmd::Render(s) => render(&s.resolve()?),
        Cmd::DumpWords(s) => dump_words(&s.resolve()?),
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
