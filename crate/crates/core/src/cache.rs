//! Versioned CSV cache of [`OmegaBuckets`].
//!
//! ```text
//! # meanomega-buckets v1
//! x,w,T
//! 10,0,1
//! 10,1,18
//! 10,2,8
//! ```
//! One row per `(checkpoint, w)`, checkpoints ascending, `w = 0..=W` contiguous.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::sieve::OmegaBuckets;

pub const CACHE_HEADER: &str = "# meanomega-buckets v1";
pub const CACHE_COLUMNS: &str = "x,w,T";

pub fn write_buckets<W: Write>(mut out: W, buckets: &[OmegaBuckets]) -> std::io::Result<()> {
    writeln!(out, "{CACHE_HEADER}")?;
    writeln!(out, "{CACHE_COLUMNS}")?;
    for b in buckets {
        for (w, t) in b.t.iter().enumerate() {
            writeln!(out, "{},{w},{t}", b.x)?;
        }
    }
    out.flush()
}

fn bad(line: usize, reason: impl Into<String>) -> Error {
    Error::Cache {
        line,
        reason: reason.into(),
    }
}

pub fn read_buckets<R: BufRead>(input: R) -> Result<Vec<OmegaBuckets>> {
    let mut lines = input.lines().enumerate();
    for want in [CACHE_HEADER, CACHE_COLUMNS] {
        match lines.next() {
            Some((_, Ok(l))) if l.trim_end() == want => {}
            Some((i, Ok(_))) => return Err(bad(i + 1, format!("expected {want:?}"))),
            Some((i, Err(e))) => return Err(bad(i + 1, e.to_string())),
            None => return Err(bad(1, format!("missing {want:?}"))),
        }
    }
    let mut out: Vec<OmegaBuckets> = Vec::new();
    for (i, line) in lines {
        let lineno = i + 1;
        let line = line.map_err(|e| bad(lineno, e.to_string()))?;
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(bad(lineno, "expected three fields"));
        }
        let parse = |s: &str| s.parse::<u64>().map_err(|e| bad(lineno, format!("{s:?}: {e}")));
        let (x, w, t) = (parse(fields[0])?, parse(fields[1])? as usize, parse(fields[2])?);
        match out.last_mut() {
            Some(b) if b.x == x => {
                if w != b.t.len() {
                    return Err(bad(lineno, format!("w = {w} out of sequence")));
                }
                b.t.push(t);
            }
            last => {
                if last.is_some_and(|b| b.x > x) {
                    return Err(bad(lineno, "checkpoints not ascending"));
                }
                if w != 0 {
                    return Err(bad(lineno, "each checkpoint must start at w = 0"));
                }
                out.push(OmegaBuckets { x, t: vec![t] });
            }
        }
    }
    if out.is_empty() {
        return Err(bad(3, "no bucket rows"));
    }
    Ok(out)
}

pub fn save(path: &Path, buckets: &[OmegaBuckets]) -> Result<()> {
    let f = File::create(path)?;
    write_buckets(BufWriter::new(f), buckets)?;
    Ok(())
}

pub fn load(path: &Path) -> Result<Vec<OmegaBuckets>> {
    let f = File::open(path)?;
    read_buckets(BufReader::new(f))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_for_ten() {
        let b = vec![
            OmegaBuckets { x: 1, t: vec![1] },
            OmegaBuckets {
                x: 10,
                t: vec![1, 18, 8],
            },
        ];
        let mut buf = Vec::new();
        write_buckets(&mut buf, &b).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text, "# meanomega-buckets v1\nx,w,T\n1,0,1\n10,0,1\n10,1,18\n10,2,8\n");
        assert_eq!(read_buckets(&buf[..]).unwrap(), b);
    }

    #[test]
    fn malformed_caches() {
        let cases = [
            "",
            "# meanomega-buckets v2\nx,w,T\n1,0,1\n",
            "# meanomega-buckets v1\nx,T\n1,0,1\n",
            "# meanomega-buckets v1\nx,w,T\n",
            "# meanomega-buckets v1\nx,w,T\n1,1,1\n",
            "# meanomega-buckets v1\nx,w,T\n10,0,1\n10,2,8\n",
            "# meanomega-buckets v1\nx,w,T\n10,0,1\n5,0,1\n",
            "# meanomega-buckets v1\nx,w,T\n10,0,-1\n",
            "# meanomega-buckets v1\nx,w,T\n10,0\n",
        ];
        for c in cases {
            assert!(matches!(read_buckets(c.as_bytes()), Err(Error::Cache { .. })), "{c:?}");
        }
    }
}
