//! Line-oriented text interchange format.
//!
//! ```text
//! # comment
//! flatcomplex <n> <#vertices> <#simplices>
//! <v0> <v1> ... <vn>          one line per top simplex
//! edge <u> <v> <length>
//! ```
//!
//! The alternative `embedded <n> <#vertices> <#simplices>` header is
//! followed by `vertex <x> <y> [<z>]` lines and the same bare simplex
//! lines; edge lengths are derived from the coordinates. Lengths and
//! coordinates are written with 17 significant digits.

use super::FlatComplex;
use crate::geom::Point3;
use crate::{Error, Result};

impl FlatComplex {
    pub fn parse(text: &str) -> Result<Self> {
        let mut header: Option<(bool, usize, usize, usize)> = None;
        let mut simplices: Vec<Vec<usize>> = Vec::new();
        let mut edges: Vec<(usize, usize, f64)> = Vec::new();
        let mut coords: Vec<Point3> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            match header {
                None => {
                    let embedded = match fields[0] {
                        "flatcomplex" => false,
                        "embedded" => true,
                        other => {
                            return Err(Error::Parse {
                                line: line_no,
                                message: format!("unknown header '{other}'"),
                            })
                        }
                    };
                    if fields.len() != 4 {
                        return Err(Error::Parse {
                            line: line_no,
                            message: "header needs: <n> <#vertices> <#simplices>".into(),
                        });
                    }
                    let n = parse_num::<usize>(fields[1], line_no)?;
                    let nv = parse_num::<usize>(fields[2], line_no)?;
                    let ns = parse_num::<usize>(fields[3], line_no)?;
                    header = Some((embedded, n, nv, ns));
                }
                Some((embedded, n, nv, _)) => match fields[0] {
                    "edge" => {
                        if embedded {
                            return Err(Error::Parse {
                                line: line_no,
                                message: "edge lines not allowed in embedded format".into(),
                            });
                        }
                        if fields.len() != 4 {
                            return Err(Error::Parse {
                                line: line_no,
                                message: "edge needs: <u> <v> <length>".into(),
                            });
                        }
                        edges.push((
                            parse_num(fields[1], line_no)?,
                            parse_num(fields[2], line_no)?,
                            parse_num(fields[3], line_no)?,
                        ));
                    }
                    "vertex" => {
                        if !embedded {
                            return Err(Error::Parse {
                                line: line_no,
                                message: "vertex lines only allowed in embedded format".into(),
                            });
                        }
                        if fields.len() < 3 || fields.len() > 4 {
                            return Err(Error::Parse {
                                line: line_no,
                                message: "vertex needs 2 or 3 coordinates".into(),
                            });
                        }
                        let mut p = [0.0f64; 3];
                        for (i, f) in fields[1..].iter().enumerate() {
                            p[i] = parse_num(f, line_no)?;
                        }
                        coords.push(p);
                    }
                    _ => {
                        if fields.len() != n + 1 {
                            return Err(Error::Parse {
                                line: line_no,
                                message: format!(
                                    "simplex line has {} ids, expected {}",
                                    fields.len(),
                                    n + 1
                                ),
                            });
                        }
                        let mut s = Vec::with_capacity(n + 1);
                        for f in &fields {
                            let v: usize = parse_num(f, line_no)?;
                            if v >= nv {
                                return Err(Error::Parse {
                                    line: line_no,
                                    message: format!("vertex id {v} out of range"),
                                });
                            }
                            s.push(v);
                        }
                        simplices.push(s);
                    }
                },
            }
        }
        let Some((embedded, n, nv, ns)) = header else {
            return Err(Error::Parse { line: 0, message: "missing header".into() });
        };
        if simplices.len() != ns {
            return Err(Error::Parse {
                line: 0,
                message: format!("expected {ns} simplices, found {}", simplices.len()),
            });
        }
        if embedded {
            if coords.len() != nv {
                return Err(Error::Parse {
                    line: 0,
                    message: format!("expected {nv} vertices, found {}", coords.len()),
                });
            }
            FlatComplex::from_embedded(n, coords, simplices)
        } else {
            FlatComplex::from_edge_lengths(n, nv, simplices, edges)
        }
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// Serialize in the `flatcomplex` length format, deterministically.
    pub fn to_interchange(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "flatcomplex {} {} {}\n",
            self.dim(),
            self.vertex_count(),
            self.top_count()
        ));
        for t in 0..self.top_count() {
            let ids: Vec<String> = self.top(t).iter().map(|v| v.to_string()).collect();
            out.push_str(&ids.join(" "));
            out.push('\n');
        }
        for e in 0..self.edge_count() {
            let [u, v] = self.edge(e);
            let len = self.edge_length(u, v).unwrap();
            out.push_str(&format!("edge {u} {v} {}\n", fmt17(len)));
        }
        out
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_interchange())?;
        Ok(())
    }
}

/// 17 significant digits: enough to round-trip any f64.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_num<T: std::str::FromStr>(s: &str, line: usize) -> Result<T> {
    s.parse().map_err(|_| Error::Parse {
        line,
        message: format!("cannot parse '{s}'"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_flatcomplex_square() {
        let text = "\
# two right triangles glued along the hypotenuse
flatcomplex 2 4 2
0 1 2
0 2 3
edge 0 1 1.0
edge 1 2 1.0
edge 2 3 1.0
edge 0 3 1.0
edge 0 2 1.4142135623730951
";
        let k = FlatComplex::parse(text).unwrap();
        assert_eq!(k.top_count(), 2);
        assert!((k.volume() - 1.0).abs() < 1e-12);
        assert!(k.boundary_facets().len() == 4);
    }

    #[test]
    fn roundtrip_exact() {
        let text = "\
flatcomplex 2 4 2
0 1 2
0 2 3
edge 0 1 1.0
edge 1 2 1.0
edge 2 3 1.0
edge 0 3 1.0
edge 0 2 1.4142135623730951
";
        let k = FlatComplex::parse(text).unwrap();
        let emitted = k.to_interchange();
        let k2 = FlatComplex::parse(&emitted).unwrap();
        assert_eq!(k.volume(), k2.volume());
        let emitted2 = k2.to_interchange();
        assert_eq!(emitted, emitted2);
    }

    #[test]
    fn parse_embedded_triangle() {
        let text = "\
embedded 2 3 1
vertex 0.0 0.0
vertex 2.0 0.0
vertex 0.0 3.0
0 1 2
";
        let k = FlatComplex::parse(text).unwrap();
        assert!((k.volume() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_named_in_error() {
        let text = "\
flatcomplex 2 3 1
0 1 2
edge 0 1 1.0
edge 0 2 1.0
edge 1 2 3.0
";
        let err = FlatComplex::parse(text).unwrap_err();
        assert!(matches!(err, Error::DegenerateSimplex { simplex: 0 }));
    }

    #[test]
    fn malformed_header_rejected() {
        assert!(matches!(
            FlatComplex::parse("simplicial 2 3 1\n").unwrap_err(),
            Error::Parse { .. }
        ));
    }
}
