//! Line-oriented text format for trained pipelines.
//!
//! ```text
//! playclass-model 1
//! variant multinomial
//! weighting tfidf
//! alpha 1.0000000000000000e0
//! vocab_id 9a3c0e5d11f2b7a4
//! n_documents 4
//! stop_words english-318-v1 318
//! stop a
//! ...
//! classes 2
//! class 0 FINANCE -6.9314718055994529e-1
//! ...
//! features 3
//! feature 0 bank 1
//! ...
//! cond 0 <V reals>
//! neg 0 <V reals>          (bernoulli only)
//! end
//! ```
//!
//! Reals are written with 17 significant digits, which round-trips every
//! `f64` exactly, so a reloaded model scores bit-identically.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::classifier::{NbModel, NbVariant};
use crate::error::{Error, Result};
use crate::features::{Vocabulary, WeightMode};
use crate::pipeline::{Fitted, TrainedPipeline};
use crate::textproc::StopWordList;

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "playclass-model";

fn real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_model<W: Write>(p: &TrainedPipeline, mut w: W) -> io::Result<()> {
    let m = p.model();
    let v = p.vocab();
    writeln!(w, "{MAGIC} {FORMAT_VERSION}")?;
    writeln!(w, "variant {}", m.variant.as_str())?;
    writeln!(w, "weighting {}", m.weighting.as_str())?;
    writeln!(w, "alpha {}", real(m.alpha))?;
    writeln!(w, "vocab_id {:016x}", m.vocab_id)?;
    writeln!(w, "n_documents {}", v.n_documents())?;
    let name: String = p
        .stop_words
        .source_name()
        .chars()
        .map(|c| if c.is_whitespace() { '_' } else { c })
        .collect();
    let name = if name.is_empty() { "unnamed".to_string() } else { name };
    writeln!(w, "stop_words {name} {}", p.stop_words.len())?;
    for s in p.stop_words.words() {
        writeln!(w, "stop {s}")?;
    }
    writeln!(w, "classes {}", m.classes.len())?;
    for (i, (c, lp)) in m.classes.iter().zip(&m.log_prior).enumerate() {
        writeln!(w, "class {i} {c} {}", real(*lp))?;
    }
    writeln!(w, "features {}", v.len())?;
    for (i, (t, d)) in v.tokens().iter().zip(v.document_frequencies()).enumerate() {
        writeln!(w, "feature {i} {t} {d}")?;
    }
    let table = |w: &mut W, key: &str, rows: &[Vec<f64>]| -> io::Result<()> {
        for (i, row) in rows.iter().enumerate() {
            write!(w, "{key} {i}")?;
            for x in row {
                write!(w, " {}", real(*x))?;
            }
            writeln!(w)?;
        }
        Ok(())
    };
    table(&mut w, "cond", &m.cond_log_prob)?;
    if m.variant == NbVariant::Bernoulli {
        table(&mut w, "neg", &m.cond_log_neg)?;
    }
    writeln!(w, "end")?;
    w.flush()
}

pub fn save_model(p: &TrainedPipeline, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_model(p, BufWriter::new(file)).map_err(|e| Error::io(path, e))
}

struct Lines<R> {
    inner: io::Lines<R>,
    source: String,
    line_no: usize,
}

impl<R: BufRead> Lines<R> {
    fn err(&self, message: impl Into<String>) -> Error {
        Error::Format {
            path: self.source.clone(),
            line: self.line_no,
            message: message.into(),
        }
    }

    fn next_line(&mut self) -> Result<String> {
        self.line_no += 1;
        match self.inner.next() {
            Some(Ok(l)) => Ok(l),
            Some(Err(e)) => Err(Error::io(&self.source, e)),
            None => Err(self.err("unexpected end of file")),
        }
    }

    /// Reads a line starting with `key` and returns the remaining fields.
    fn record(&mut self, key: &str) -> Result<Vec<String>> {
        let line = self.next_line()?;
        let mut fields = line.split(' ');
        if fields.next() != Some(key) {
            return Err(self.err(format!("expected `{key}` line")));
        }
        Ok(fields.map(str::to_string).collect())
    }

    fn single(&mut self, key: &str) -> Result<String> {
        let mut f = self.record(key)?;
        if f.len() != 1 {
            return Err(self.err(format!("`{key}` takes one value")));
        }
        Ok(f.remove(0))
    }

    fn parse<T: std::str::FromStr>(&self, s: &str, what: &str) -> Result<T> {
        s.parse()
            .map_err(|_| self.err(format!("invalid {what} {s:?}")))
    }

    fn indexed(&mut self, key: &str, expect: usize) -> Result<Vec<String>> {
        let mut f = self.record(key)?;
        if f.is_empty() || self.parse::<usize>(&f[0], "index")? != expect {
            return Err(self.err(format!("expected `{key} {expect}`")));
        }
        f.remove(0);
        Ok(f)
    }

    fn table(&mut self, key: &str, rows: usize, cols: usize) -> Result<Vec<Vec<f64>>> {
        (0..rows)
            .map(|i| {
                let f = self.indexed(key, i)?;
                if f.len() != cols {
                    return Err(self.err(format!("expected {cols} values")));
                }
                f.iter().map(|x| self.parse(x, "real")).collect()
            })
            .collect()
    }
}

pub fn read_model<R: BufRead>(reader: R, source: &str) -> Result<TrainedPipeline> {
    let mut r = Lines {
        inner: reader.lines(),
        source: source.to_string(),
        line_no: 0,
    };
    let version = r.single(MAGIC)?;
    if r.parse::<u32>(&version, "version")? != FORMAT_VERSION {
        return Err(r.err(format!("unsupported format version {version}")));
    }
    let variant = r.single("variant")?;
    let variant =
        NbVariant::parse(&variant).ok_or_else(|| r.err(format!("unknown variant {variant:?}")))?;
    let weighting = r.single("weighting")?;
    let weighting = WeightMode::parse(&weighting)
        .ok_or_else(|| r.err(format!("unknown weighting {weighting:?}")))?;
    let alpha: f64 = {
        let s = r.single("alpha")?;
        r.parse(&s, "alpha")?
    };
    let vocab_id = {
        let s = r.single("vocab_id")?;
        u64::from_str_radix(&s, 16).map_err(|_| r.err("invalid vocab_id"))?
    };
    let n_documents: usize = {
        let s = r.single("n_documents")?;
        r.parse(&s, "n_documents")?
    };

    let sw = r.record("stop_words")?;
    if sw.len() != 2 {
        return Err(r.err("expected `stop_words <name> <count>`"));
    }
    let n_stops: usize = r.parse(&sw[1], "count")?;
    let stops = (0..n_stops)
        .map(|_| r.single("stop"))
        .collect::<Result<Vec<_>>>()?;
    let stop_words = StopWordList::from_words(stops, sw[0].clone());

    let n_classes: usize = {
        let s = r.single("classes")?;
        r.parse(&s, "class count")?
    };
    let mut classes = Vec::with_capacity(n_classes);
    let mut log_prior = Vec::with_capacity(n_classes);
    for i in 0..n_classes {
        let f = r.indexed("class", i)?;
        if f.len() != 2 {
            return Err(r.err("expected `class <i> <label> <log_prior>`"));
        }
        classes.push(f[0].clone());
        log_prior.push(r.parse(&f[1], "log prior")?);
    }

    let n_features: usize = {
        let s = r.single("features")?;
        r.parse(&s, "feature count")?
    };
    let mut tokens = Vec::with_capacity(n_features);
    let mut df = Vec::with_capacity(n_features);
    for i in 0..n_features {
        let f = r.indexed("feature", i)?;
        if f.len() != 2 {
            return Err(r.err("expected `feature <i> <token> <df>`"));
        }
        tokens.push(f[0].clone());
        df.push(r.parse(&f[1], "df")?);
    }
    let vocab = Vocabulary::from_parts(tokens, df, n_documents).map_err(|e| r.err(e.to_string()))?;
    if vocab.id() != vocab_id {
        return Err(r.err("vocab_id does not match the stored vocabulary"));
    }

    let cond = r.table("cond", n_classes, n_features)?;
    let neg = if variant == NbVariant::Bernoulli {
        r.table("neg", n_classes, n_features)?
    } else {
        Vec::new()
    };
    if r.next_line()? != "end" {
        return Err(r.err("expected `end`"));
    }
    let model = NbModel::from_tables(
        variant, weighting, classes, log_prior, cond, neg, alpha, vocab_id,
    )
    .map_err(|e| r.err(e.to_string()))?;
    Ok(TrainedPipeline {
        fitted: Fitted { vocab, model },
        stop_words,
    })
}

pub fn load_model(path: &Path) -> Result<TrainedPipeline> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_model(BufReader::new(file), &path.display().to_string())
}
