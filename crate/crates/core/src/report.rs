//! Long-format CSV tables shared by the protocols and the command line.

use std::io;

use crate::percolation::Estimate;

/// Version written in the `# schema=` comment.
pub const SCHEMA_VERSION: u32 = 1;

pub const COLUMNS: [&str; 10] = [
    "quantity", "lattice", "p", "p2", "L", "nsamples", "mean", "stderr", "seed", "flags",
];

/// Where a value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    MonteCarlo,
    Series,
    /// Computed from other rows of the same table.
    Derived,
}

impl Provenance {
    pub fn tag(self) -> &'static str {
        match self {
            Provenance::MonteCarlo => "mc",
            Provenance::Series => "series",
            Provenance::Derived => "derived",
        }
    }
}

/// One value of one quantity at one density.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub quantity: String,
    pub lattice: String,
    pub p: f64,
    pub p2: Option<f64>,
    pub l: Option<usize>,
    pub nsamples: Option<usize>,
    pub mean: f64,
    pub stderr: Option<f64>,
    pub seed: u64,
    pub provenance: Provenance,
    /// Extra markers such as `near_pc`, `advantage`, `indistinguishable`.
    pub flags: Vec<String>,
}

impl Row {
    pub fn new(quantity: &str, lattice: &str, p: f64, mean: f64, provenance: Provenance, seed: u64) -> Self {
        Row {
            quantity: quantity.to_string(),
            lattice: lattice.to_string(),
            p,
            p2: None,
            l: None,
            nsamples: None,
            mean,
            stderr: None,
            seed,
            provenance,
            flags: Vec::new(),
        }
    }

    /// Row for a Monte Carlo estimate, flagged when near a threshold.
    pub fn from_estimate(quantity: &str, lattice: &str, p: f64, e: &Estimate) -> Self {
        let mut row = Row::new(quantity, lattice, p, e.mean, Provenance::MonteCarlo, e.seed);
        row.l = Some(e.l);
        row.nsamples = Some(e.nsamples);
        row.stderr = Some(e.stderr);
        if e.near_critical {
            row.flag("near_pc");
        }
        row
    }

    pub fn flag(&mut self, f: &str) {
        if !self.has_flag(f) {
            self.flags.push(f.to_string());
        }
    }

    pub fn has_flag(&self, f: &str) -> bool {
        self.flags.iter().any(|x| x == f)
    }

    fn record(&self) -> [String; 10] {
        let opt = |v: Option<String>| v.unwrap_or_default();
        let mut flags = vec![self.provenance.tag().to_string()];
        flags.extend(self.flags.iter().cloned());
        [
            self.quantity.clone(),
            self.lattice.clone(),
            self.p.to_string(),
            opt(self.p2.map(|x| x.to_string())),
            opt(self.l.map(|x| x.to_string())),
            opt(self.nsamples.map(|x| x.to_string())),
            self.mean.to_string(),
            opt(self.stderr.map(|x| x.to_string())),
            self.seed.to_string(),
            flags.join(";"),
        ]
    }
}

/// Writes `# schema=1`, the given comment lines, the header and the rows.
pub fn write_csv<W: io::Write>(mut w: W, comments: &[String], rows: &[Row]) -> io::Result<()> {
    writeln!(w, "# schema={SCHEMA_VERSION}")?;
    for c in comments {
        writeln!(w, "# {c}")?;
    }
    let mut out = csv::Writer::from_writer(w);
    out.write_record(COLUMNS)?;
    for r in rows {
        out.write_record(r.record())?;
    }
    out.flush()
}

pub fn to_csv_string(comments: &[String], rows: &[Row]) -> String {
    let mut buf = Vec::new();
    write_csv(&mut buf, comments, rows).expect("writing to memory");
    String::from_utf8(buf).expect("csv output is utf-8")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout() {
        let mut r = Row::new("theta", "square", 0.9, 0.999896, Provenance::Series, 7);
        r.flag("near_pc");
        r.flag("near_pc");
        let text = to_csv_string(&["run=x".into()], &[r]);
        assert_eq!(
            text,
            "# schema=1\n# run=x\nquantity,lattice,p,p2,L,nsamples,mean,stderr,seed,flags\n\
             theta,square,0.9,,,,0.999896,,7,series;near_pc\n"
        );
    }
}
