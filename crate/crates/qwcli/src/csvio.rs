//! CSV formats with `#` provenance lines, and atomic file writes.
//!
//! Reals are written with 17 significant digits (`{:.16e}`), which round-trips
//! every `f64` exactly.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use qbessel_core::{LatticeFn, QGrid, Scalogram, VParams};

use crate::error::{CliError, CliResult};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const LATTICE_HEADER: &str = "n,x,value";
pub const SCALOGRAM_HEADER: &str = "ka,kb,a,b,value";
pub const WAVELET_HEADER: &str = "k,value";

pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `contents` to a temporary file next to `path`, then renames it over `path`.
pub fn write_atomic(path: &Path, contents: &[u8]) -> CliResult<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .map_err(|e| CliError::Validation(format!("cannot create file in {}: {e}", dir.display())))?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .map_err(|e| CliError::Validation(format!("cannot write {}: {}", path.display(), e.error)))?;
    Ok(())
}

/// `(q, alpha, n, window)` stamped on every output and checked on input.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub kind: String,
    pub q: f64,
    pub alpha: f64,
    pub n_index: u32,
    pub n_min: i32,
    pub n_max: i32,
    pub extra: Vec<(String, String)>,
}

impl Provenance {
    pub fn new(kind: &str, grid: &QGrid, v: &VParams) -> Self {
        Self {
            kind: kind.to_string(),
            q: grid.q(),
            alpha: v.alpha(),
            n_index: v.n_index(),
            n_min: grid.n_min(),
            n_max: grid.n_max(),
            extra: Vec::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl Into<String>) -> Self {
        self.extra.push((key.to_string(), value.into()));
        self
    }

    fn write(&self, out: &mut String) {
        let _ = writeln!(out, "# tool=qwcli {TOOL_VERSION}");
        let _ = writeln!(out, "# kind={}", self.kind);
        let _ = writeln!(out, "# q={}", fmt_real(self.q));
        let _ = writeln!(out, "# alpha={}", fmt_real(self.alpha));
        let _ = writeln!(out, "# n_index={}", self.n_index);
        let _ = writeln!(out, "# window={},{}", self.n_min, self.n_max);
        for (k, v) in &self.extra {
            let _ = writeln!(out, "# {k}={v}");
        }
    }

    /// Rebuilds provenance from parsed comment lines; `None` if a field is missing.
    pub fn from_comments(c: &BTreeMap<String, String>) -> Option<Self> {
        let (lo, hi) = c.get("window")?.split_once(',')?;
        Some(Self {
            kind: c.get("kind")?.clone(),
            q: c.get("q")?.parse().ok()?,
            alpha: c.get("alpha")?.parse().ok()?,
            n_index: c.get("n_index")?.parse().ok()?,
            n_min: lo.trim().parse().ok()?,
            n_max: hi.trim().parse().ok()?,
            extra: Vec::new(),
        })
    }

    /// Same `q`, `alpha`, `n` and window, compared bitwise.
    pub fn same_setup(&self, other: &Provenance) -> bool {
        self.q.to_bits() == other.q.to_bits()
            && self.alpha.to_bits() == other.alpha.to_bits()
            && self.n_index == other.n_index
            && (self.n_min, self.n_max) == (other.n_min, other.n_max)
    }
}

/// Comment map, header line and data rows of a CSV file.
struct Parsed {
    comments: BTreeMap<String, String>,
    rows: Vec<(usize, Vec<String>)>,
}

fn parse_csv(text: &str, header: &str, what: &str) -> CliResult<Parsed> {
    let mut comments = BTreeMap::new();
    let mut rows = Vec::new();
    let mut seen_header = false;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let lineno = i + 1;
        if line.is_empty() {
            continue;
        }
        if let Some(c) = line.strip_prefix('#') {
            if let Some((k, v)) = c.trim().split_once('=') {
                comments.insert(k.trim().to_string(), v.trim().to_string());
            }
            continue;
        }
        if !seen_header {
            if line != header {
                return Err(CliError::Validation(format!(
                    "{what}: line {lineno}: expected header `{header}`, found `{line}`"
                )));
            }
            seen_header = true;
            continue;
        }
        let fields: Vec<String> = line.split(',').map(|s| s.trim().to_string()).collect();
        let want = header.split(',').count();
        if fields.len() != want {
            return Err(CliError::Validation(format!(
                "{what}: line {lineno}: expected {want} fields, found {}",
                fields.len()
            )));
        }
        rows.push((lineno, fields));
    }
    if !seen_header {
        return Err(CliError::Validation(format!("{what}: missing header `{header}`")));
    }
    Ok(Parsed { comments, rows })
}

fn field<T: std::str::FromStr>(what: &str, lineno: usize, name: &str, s: &str) -> CliResult<T> {
    s.parse()
        .map_err(|_| CliError::Validation(format!("{what}: line {lineno}: cannot parse {name} `{s}`")))
}

fn finite(what: &str, lineno: usize, x: f64) -> CliResult<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(CliError::Validation(format!(
            "{what}: line {lineno}: value is not finite"
        )))
    }
}

pub fn format_lattice_fn(f: &LatticeFn, prov: &Provenance) -> String {
    let mut out = String::new();
    prov.write(&mut out);
    out.push_str(LATTICE_HEADER);
    out.push('\n');
    for ((k, value), x) in f.iter().zip(f.grid().points()) {
        let _ = writeln!(out, "{k},{},{}", fmt_real(*x), fmt_real(value));
    }
    out
}

/// Parses a `n,x,value` file that must cover `grid` exactly, in ascending `n`.
pub fn parse_lattice_fn(text: &str, grid: &QGrid, what: &str) -> CliResult<LatticeFn> {
    let parsed = parse_csv(text, LATTICE_HEADER, what)?;
    if parsed.rows.len() != grid.len() {
        return Err(CliError::Validation(format!(
            "{what}: {} rows, but the window [{}, {}] has {} points",
            parsed.rows.len(),
            grid.n_min(),
            grid.n_max(),
            grid.len()
        )));
    }
    let mut values = Vec::with_capacity(grid.len());
    for ((lineno, row), (k, point)) in parsed.rows.iter().zip(grid.indices().zip(grid.points())) {
        let n: i32 = field(what, *lineno, "n", &row[0])?;
        if n != k {
            return Err(CliError::Validation(format!(
                "{what}: line {lineno}: expected n = {k}, found {n}"
            )));
        }
        let x: f64 = field(what, *lineno, "x", &row[1])?;
        if !((x - point).abs() <= 1e-12 * point) {
            return Err(CliError::Validation(format!(
                "{what}: line {lineno}: x = {x} is not the lattice point q^{k} = {point}"
            )));
        }
        let v: f64 = field(what, *lineno, "value", &row[2])?;
        values.push(finite(what, *lineno, v)?);
    }
    Ok(LatticeFn::new(grid.clone(), values)?)
}

pub fn read_lattice_fn(path: &Path, grid: &QGrid) -> CliResult<LatticeFn> {
    let what = path.display().to_string();
    let text = read(path)?;
    parse_lattice_fn(&text, grid, &what)
}

pub fn format_scalogram(s: &Scalogram, prov: &Provenance) -> String {
    let mut out = String::new();
    prov.write(&mut out);
    out.push_str(SCALOGRAM_HEADER);
    out.push('\n');
    for ka in s.ka_range() {
        let a = s.q.powi(ka);
        for (kb, value) in s.kb_range().zip(s.row(ka)) {
            let b = s.q.powi(kb);
            let _ = writeln!(out, "{ka},{kb},{},{},{}", fmt_real(a), fmt_real(b), fmt_real(*value));
        }
    }
    out
}

/// Parses a scalogram file: a full `ka x kb` rectangle, row-major over `ka`.
pub fn parse_scalogram(text: &str, what: &str) -> CliResult<Scalogram> {
    let parsed = parse_csv(text, SCALOGRAM_HEADER, what)?;
    let prov = Provenance::from_comments(&parsed.comments).ok_or_else(|| {
        CliError::Validation(format!(
            "{what}: missing provenance lines (kind, q, alpha, n_index, window)"
        ))
    })?;
    if prov.kind != "scalogram" {
        return Err(CliError::Validation(format!(
            "{what}: kind is `{}`, not a scalogram",
            prov.kind
        )));
    }
    let mut cells = Vec::with_capacity(parsed.rows.len());
    for (lineno, row) in &parsed.rows {
        let ka: i32 = field(what, *lineno, "ka", &row[0])?;
        let kb: i32 = field(what, *lineno, "kb", &row[1])?;
        let v: f64 = field(what, *lineno, "value", &row[4])?;
        cells.push((*lineno, ka, kb, finite(what, *lineno, v)?));
    }
    let Some(&(_, ka_lo, kb_lo, _)) = cells.first() else {
        return Err(CliError::Validation(format!("{what}: no coefficients")));
    };
    let &(_, ka_hi, kb_hi, _) = cells.last().expect("nonempty");
    if ka_hi < ka_lo || kb_hi < kb_lo {
        return Err(CliError::Validation(format!("{what}: rows are not in ascending order")));
    }
    let cols = (kb_hi - kb_lo + 1) as usize;
    let rows = (ka_hi - ka_lo + 1) as usize;
    if cells.len() != rows * cols {
        return Err(CliError::Validation(format!(
            "{what}: {} coefficients do not fill the {rows} x {cols} rectangle",
            cells.len()
        )));
    }
    for (i, &(lineno, ka, kb, _)) in cells.iter().enumerate() {
        let expect = (ka_lo + (i / cols) as i32, kb_lo + (i % cols) as i32);
        if (ka, kb) != expect {
            return Err(CliError::Validation(format!(
                "{what}: line {lineno}: expected (ka, kb) = {expect:?}, found ({ka}, {kb})"
            )));
        }
    }
    Ok(Scalogram {
        q: prov.q,
        alpha: prov.alpha,
        n_index: prov.n_index,
        n_min: prov.n_min,
        n_max: prov.n_max,
        ka_lo,
        ka_hi,
        kb_lo,
        kb_hi,
        coeffs: cells.iter().map(|c| c.3).collect(),
        warnings: 0,
    })
}

pub fn read_scalogram(path: &Path) -> CliResult<Scalogram> {
    parse_scalogram(&read(path)?, &path.display().to_string())
}

pub fn format_wavelet_spec(spec: &[(i32, f64)], prov: &Provenance) -> String {
    let mut out = String::new();
    prov.write(&mut out);
    out.push_str(WAVELET_HEADER);
    out.push('\n');
    for (k, h) in spec {
        let _ = writeln!(out, "{k},{}", fmt_real(*h));
    }
    out
}

/// Parses `k,value` rows of Fourier-domain wavelet heights.
pub fn parse_wavelet_spec(text: &str, what: &str) -> CliResult<Vec<(i32, f64)>> {
    let parsed = parse_csv(text, WAVELET_HEADER, what)?;
    let mut spec = Vec::with_capacity(parsed.rows.len());
    for (lineno, row) in &parsed.rows {
        let k: i32 = field(what, *lineno, "k", &row[0])?;
        let h: f64 = field(what, *lineno, "value", &row[1])?;
        spec.push((k, finite(what, *lineno, h)?));
    }
    if spec.is_empty() {
        return Err(CliError::Validation(format!("{what}: wavelet spec has no rows")));
    }
    Ok(spec)
}

pub fn read_wavelet_spec(path: &Path) -> CliResult<Vec<(i32, f64)>> {
    parse_wavelet_spec(&read(path)?, &path.display().to_string())
}

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (QGrid, VParams) {
        (QGrid::new(0.5, -2, 2).unwrap(), VParams::new(0.5, 1).unwrap())
    }

    #[test]
    fn reals_round_trip_at_17_digits() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0, f64::MIN_POSITIVE] {
            let s = fmt_real(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(fmt_real(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn lattice_fn_round_trip() {
        let (g, v) = setup();
        let f = LatticeFn::from_fn(&g, |k, x| k as f64 / 3.0 + x).unwrap();
        let text = format_lattice_fn(&f, &Provenance::new("lattice_fn", &g, &v));
        assert!(text.lines().take_while(|l| l.starts_with('#')).count() >= 6);
        assert!(text.contains("\nn,x,value\n-2,4.0000000000000000e0,"));
        assert_eq!(parse_lattice_fn(&text, &g, "t").unwrap(), f);
    }

    #[test]
    fn lattice_fn_rejects_malformed_input() {
        let (g, _) = setup();
        let good = "n,x,value\n-2,4,0\n-1,2,0\n0,1,0\n1,0.5,0\n2,0.25,0\n";
        assert!(parse_lattice_fn(good, &g, "t").is_ok());
        for bad in [
            good.replace("n,x,value", "n,x,val"),
            good.replace("-1,2,0\n", ""),
            good.replace("0,1,0", "0,1.5,0"),
            good.replace("0,1,0", "0,1,nan"),
            good.replace("0,1,0", "0,1"),
            good.replace("0,1,0", "3,1,0"),
        ] {
            assert!(
                matches!(parse_lattice_fn(&bad, &g, "t"), Err(CliError::Validation(_))),
                "{bad}"
            );
        }
    }

    #[test]
    fn scalogram_round_trip() {
        let s = Scalogram {
            q: 0.5,
            alpha: 0.5,
            n_index: 1,
            n_min: -2,
            n_max: 2,
            ka_lo: -1,
            ka_hi: 0,
            kb_lo: 0,
            kb_hi: 2,
            coeffs: vec![1.0, -2.0, 0.3, 4.0, 5.5, 1e-300],
            warnings: 0,
        };
        let (g, v) = setup();
        let text = format_scalogram(&s, &Provenance::new("scalogram", &g, &v));
        assert!(text.contains("\nka,kb,a,b,value\n-1,0,2.0000000000000000e0,1.0000000000000000e0,"));
        assert_eq!(parse_scalogram(&text, "t").unwrap(), s);
        let missing_row = text.replace(
            "0,2,1.0000000000000000e0,2.5000000000000000e-1,1.0000000000000000e-300\n",
            "",
        );
        assert!(parse_scalogram(&missing_row, "t").is_err());
        let no_prov: String = text
            .lines()
            .filter(|l| !l.starts_with('#'))
            .map(|l| format!("{l}\n"))
            .collect();
        assert!(parse_scalogram(&no_prov, "t").is_err());
    }

    #[test]
    fn wavelet_spec_round_trip() {
        let (g, v) = setup();
        let spec = vec![(0, 1.0), (1, 0.5)];
        let text = format_wavelet_spec(&spec, &Provenance::new("wavelet_spec", &g, &v));
        assert_eq!(parse_wavelet_spec(&text, "t").unwrap(), spec);
        assert!(parse_wavelet_spec("k,value\n", "t").is_err());
    }

    #[test]
    fn atomic_write_replaces_contents() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.csv");
        write_atomic(&p, b"first").unwrap();
        write_atomic(&p, b"second").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "second");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
