//! Text checkpoints.
//!
//! ```text
//! spurio-checkpoint 1
//! kind hs
//! vocab_size 412
//! embed_dim 64
//! hidden_dim 64
//! classes 2
//! vocab_hash 3f1c0e9a2b7d4410
//! embedding 412 64
//! <412 lines of 64 numbers>
//! w1 64 64
//! ...
//! b2 1 2
//! <1 line>
//! ```
//!
//! Arrays are row-major; vectors are written as a single row. Numbers use
//! the shortest round-trip decimal form so a reload is bit-exact.

use std::fs;
use std::io::Write;
use std::path::Path;

use super::hs::HS_CLASSES;
use super::linalg::Matrix;
use super::mlp::Mlp;
use super::sie::SIE_CLASSES;
use super::{HsModel, Model, SieModel};
use crate::corpus::Vocab;
use crate::error::{Error, Result};

const MAGIC: &str = "spurio-checkpoint 1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Hs,
    Sie,
}

impl ModelKind {
    fn name(self) -> &'static str {
        match self {
            ModelKind::Hs => "hs",
            ModelKind::Sie => "sie",
        }
    }

    fn classes(self) -> usize {
        match self {
            ModelKind::Hs => HS_CLASSES,
            ModelKind::Sie => SIE_CLASSES,
        }
    }
}

fn render<M: Model>(kind: ModelKind, model: &M, mlp: &Mlp, vocab: &Vocab) -> String {
    let e = model.embedding();
    let mut out = String::new();
    out.push_str(MAGIC);
    out.push('\n');
    out.push_str(&format!("kind {}\n", kind.name()));
    out.push_str(&format!("vocab_size {}\n", e.rows));
    out.push_str(&format!("embed_dim {}\n", e.cols));
    out.push_str(&format!("hidden_dim {}\n", mlp.hidden_dim()));
    out.push_str(&format!("classes {}\n", mlp.classes()));
    out.push_str(&format!("vocab_hash {}\n", vocab.hash()));
    let mut array = |name: &str, rows: usize, cols: usize, data: &[f64]| {
        out.push_str(&format!("{name} {rows} {cols}\n"));
        for r in 0..rows {
            let line: Vec<String> = data[r * cols..(r + 1) * cols].iter().map(|x| x.to_string()).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
    };
    array("embedding", e.rows, e.cols, &e.data);
    array("w1", mlp.w1.rows, mlp.w1.cols, &mlp.w1.data);
    array("b1", 1, mlp.b1.len(), &mlp.b1);
    array("w2", mlp.w2.rows, mlp.w2.cols, &mlp.w2.data);
    array("b2", 1, mlp.b2.len(), &mlp.b2);
    out
}

fn write(path: &Path, text: &str) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}

pub fn save_hs(path: &Path, model: &HsModel, vocab: &Vocab) -> Result<()> {
    check_vocab_size(model.embedding.rows, vocab)?;
    write(path, &render(ModelKind::Hs, model, &model.mlp, vocab))
}

pub fn save_sie(path: &Path, model: &SieModel, vocab: &Vocab) -> Result<()> {
    check_vocab_size(model.embedding.rows, vocab)?;
    write(path, &render(ModelKind::Sie, model, &model.mlp, vocab))
}

pub fn load_hs(path: &Path, vocab: &Vocab) -> Result<HsModel> {
    let (e, mlp) = load(path, ModelKind::Hs, vocab)?;
    HsModel::from_parts(e, mlp)
}

pub fn load_sie(path: &Path, vocab: &Vocab) -> Result<SieModel> {
    let (e, mlp) = load(path, ModelKind::Sie, vocab)?;
    SieModel::from_parts(e, mlp)
}

fn check_vocab_size(rows: usize, vocab: &Vocab) -> Result<()> {
    if rows != vocab.len() {
        return Err(Error::DimensionMismatch(format!(
            "embedding has {rows} rows but vocabulary has {} entries",
            vocab.len()
        )));
    }
    Ok(())
}

struct Reader<'a> {
    path: &'a Path,
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Reader<'a> {
    fn err(&self, line: usize, reason: impl Into<String>) -> Error {
        Error::parse(format!("{}:{}", self.path.display(), line + 1), reason)
    }

    fn next(&mut self) -> Result<(usize, &'a str)> {
        let path = self.path;
        self.lines
            .next()
            .ok_or_else(|| Error::parse(path.display().to_string(), "unexpected end of checkpoint"))
    }

    fn field(&mut self, key: &str) -> Result<&'a str> {
        let (n, line) = self.next()?;
        match line.split_once(' ') {
            Some((k, v)) if k == key => Ok(v.trim()),
            _ => Err(self.err(n, format!("expected `{key} ...`"))),
        }
    }

    fn usize_field(&mut self, key: &str) -> Result<usize> {
        let v = self.field(key)?;
        v.parse().map_err(|_| Error::parse(self.path.display().to_string(), format!("bad {key}: {v}")))
    }

    fn array(&mut self, name: &str, rows: usize, cols: usize) -> Result<Vec<f64>> {
        let (n, header) = self.next()?;
        let expected = format!("{name} {rows} {cols}");
        if header.trim() != expected {
            return Err(self.err(n, format!("expected `{expected}`, found `{header}`")));
        }
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            let (n, line) = self.next()?;
            let before = data.len();
            for tok in line.split_whitespace() {
                data.push(tok.parse::<f64>().map_err(|_| self.err(n, format!("bad number `{tok}`")))?);
            }
            if data.len() - before != cols {
                return Err(self.err(n, format!("expected {cols} values")));
            }
        }
        Ok(data)
    }
}

fn load(path: &Path, kind: ModelKind, vocab: &Vocab) -> Result<(Matrix, Mlp)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut r = Reader {
        path,
        lines: text.lines().enumerate(),
    };
    let (n, magic) = r.next()?;
    if magic.trim() != MAGIC {
        return Err(r.err(n, "not a spurio checkpoint"));
    }
    let found_kind = r.field("kind")?;
    if found_kind != kind.name() {
        return Err(Error::parse(
            path.display().to_string(),
            format!("checkpoint is a `{found_kind}` model, expected `{}`", kind.name()),
        ));
    }
    let v = r.usize_field("vocab_size")?;
    let d = r.usize_field("embed_dim")?;
    let h = r.usize_field("hidden_dim")?;
    let c = r.usize_field("classes")?;
    let hash = r.field("vocab_hash")?.to_string();
    if hash != vocab.hash() {
        return Err(Error::VocabHashMismatch {
            expected: hash,
            found: vocab.hash(),
        });
    }
    check_vocab_size(v, vocab)?;
    if c != kind.classes() {
        return Err(Error::DimensionMismatch(format!("{c} classes in a {} checkpoint", kind.name())));
    }
    let input = if kind == ModelKind::Sie { 4 * d } else { d };
    let embedding = Matrix {
        rows: v,
        cols: d,
        data: r.array("embedding", v, d)?,
    };
    let w1 = Matrix {
        rows: input,
        cols: h,
        data: r.array("w1", input, h)?,
    };
    let b1 = r.array("b1", 1, h)?;
    let w2 = Matrix {
        rows: h,
        cols: c,
        data: r.array("w2", h, c)?,
    };
    let b2 = r.array("b2", 1, c)?;
    Ok((embedding, Mlp { w1, b1, w2, b2 }))
}
