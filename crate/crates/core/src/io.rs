//! Text formats: the `stsf` surface file and the move-certificate file.

use crate::moves::{Move, MoveCertificate, Orientation};
use crate::perm::Perm;
use crate::surface::{Color, Error, Result, Surface};
use sha2::{Digest, Sha256};

/// Emits the bit-exact `stsf` format: header, size line, then one line per
/// colour with 1-based images separated by single spaces, trailing newline.
pub fn emit_surface(s: &Surface) -> String {
    let mut out = String::new();
    out.push_str("stsf 1\n");
    out.push_str(&format!("n {}\n", s.triangle_count()));
    for c in Color::ALL {
        out.push(c.letter());
        for x in 0..s.triangle_count() as u32 {
            out.push(' ');
            out.push_str(&(s.tau(c).apply(x) + 1).to_string());
        }
        out.push('\n');
    }
    out
}

pub fn surface_sha256(s: &Surface) -> String {
    let mut hasher = Sha256::new();
    hasher.update(emit_surface(s).as_bytes());
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn parse_surface(text: &str) -> Result<Surface> {
    let mut lines = text.lines().enumerate().peekable();
    // Comment lines are permitted before the header only.
    while let Some((_, line)) = lines.peek() {
        if line.trim_start().starts_with('#') || line.trim().is_empty() {
            lines.next();
        } else {
            break;
        }
    }
    let (lineno, header) = lines
        .next()
        .ok_or_else(|| Error::Parse { line: 1, msg: "missing header".into() })?;
    if header.trim() != "stsf 1" {
        return Err(Error::Parse {
            line: lineno + 1,
            msg: format!("expected \"stsf 1\", found {header:?}"),
        });
    }
    let (lineno, nline) = lines
        .next()
        .ok_or_else(|| Error::Parse { line: lineno + 2, msg: "missing n line".into() })?;
    let n: usize = nline
        .trim()
        .strip_prefix("n ")
        .and_then(|v| v.trim().parse().ok())
        .ok_or_else(|| Error::Parse {
            line: lineno + 1,
            msg: format!("expected \"n <count>\", found {nline:?}"),
        })?;
    if n == 0 || n > u32::MAX as usize {
        return Err(Error::Parse { line: lineno + 1, msg: "n out of range".into() });
    }
    let mut taus: Vec<Perm> = Vec::new();
    for want in ['R', 'G', 'B'] {
        let (lineno, line) = lines.next().ok_or_else(|| Error::Parse {
            line: lineno + 2,
            msg: format!("missing {want} line"),
        })?;
        let mut parts = line.split_whitespace();
        let tag = parts.next().unwrap_or("");
        if tag.len() != 1 || tag.chars().next() != Some(want) {
            return Err(Error::Parse {
                line: lineno + 1,
                msg: format!("expected line starting with {want:?}"),
            });
        }
        let mut images = Vec::with_capacity(n);
        for (col, tok) in parts.enumerate() {
            let v: usize = tok.parse().map_err(|_| Error::Parse {
                line: lineno + 1,
                msg: format!("column {}: bad integer {tok:?}", col + 2),
            })?;
            if v < 1 || v > n {
                return Err(Error::Parse {
                    line: lineno + 1,
                    msg: format!("column {}: image {v} out of range 1..{n}", col + 2),
                });
            }
            images.push((v - 1) as u32);
        }
        if images.len() != n {
            return Err(Error::Parse {
                line: lineno + 1,
                msg: format!("expected {n} images, found {}", images.len()),
            });
        }
        let mut seen = vec![false; n];
        for &v in &images {
            if seen[v as usize] {
                return Err(Error::Parse {
                    line: lineno + 1,
                    msg: format!("image {} repeated", v + 1),
                });
            }
            seen[v as usize] = true;
        }
        taus.push(Perm::from_images(images));
    }
    Surface::new(taus[0].clone(), taus[1].clone(), taus[2].clone())
}

/// One move per line, preceded by a line binding the start surface by hash.
pub fn emit_certificate(start: &Surface, cert: &MoveCertificate) -> String {
    let mut out = String::new();
    out.push_str(&format!("start {}\n", surface_sha256(start)));
    for mv in cert.moves() {
        match mv {
            Move::Shear { colors: (i, j), anchor, power } => {
                out.push_str(&format!(
                    "shear {}{} anchor={} power={}\n",
                    i.letter(),
                    j.letter(),
                    anchor + 1,
                    power
                ));
            }
            Move::HalfShear { orientation, anchor, side, inverse } => {
                out.push_str(&format!(
                    "halfshear {} anchor={} side={} dir={}\n",
                    match orientation {
                        Orientation::Horizontal => 'h',
                        Orientation::Vertical => 'v',
                    },
                    anchor + 1,
                    side + 1,
                    if *inverse { 'i' } else { 'f' }
                ));
            }
        }
    }
    out
}

pub fn parse_certificate(text: &str) -> Result<(String, MoveCertificate)> {
    let mut moves = Vec::new();
    let mut start_hash = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let lineno = idx + 1;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut words = line.split_whitespace();
        let head = words.next().unwrap();
        let parse_kv = |word: Option<&str>, key: &str| -> Result<i64> {
            let w = word.ok_or_else(|| Error::Parse {
                line: lineno,
                msg: format!("missing {key}=<value>"),
            })?;
            w.strip_prefix(&format!("{key}="))
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| Error::Parse {
                    line: lineno,
                    msg: format!("expected {key}=<integer>, found {w:?}"),
                })
        };
        match head {
            "start" => {
                let h = words.next().ok_or_else(|| Error::Parse {
                    line: lineno,
                    msg: "missing hash after start".into(),
                })?;
                start_hash = Some(h.to_string());
            }
            "shear" => {
                let pair = words.next().ok_or_else(|| Error::Parse {
                    line: lineno,
                    msg: "missing colour pair".into(),
                })?;
                let chars: Vec<char> = pair.chars().collect();
                let (i, j) = match chars.as_slice() {
                    [a, b] => (
                        Color::from_letter(*a).ok_or_else(|| Error::Parse {
                            line: lineno,
                            msg: format!("bad colour {a:?}"),
                        })?,
                        Color::from_letter(*b).ok_or_else(|| Error::Parse {
                            line: lineno,
                            msg: format!("bad colour {b:?}"),
                        })?,
                    ),
                    _ => {
                        return Err(Error::Parse {
                            line: lineno,
                            msg: format!("bad colour pair {pair:?}"),
                        })
                    }
                };
                let anchor = parse_kv(words.next(), "anchor")?;
                let power = parse_kv(words.next(), "power")?;
                if anchor < 1 {
                    return Err(Error::Parse { line: lineno, msg: "anchor must be >= 1".into() });
                }
                moves.push(Move::Shear {
                    colors: (i, j),
                    anchor: (anchor - 1) as u32,
                    power,
                });
            }
            "halfshear" => {
                let orient = words.next().ok_or_else(|| Error::Parse {
                    line: lineno,
                    msg: "missing orientation".into(),
                })?;
                let orientation = match orient {
                    "h" => Orientation::Horizontal,
                    "v" => Orientation::Vertical,
                    other => {
                        return Err(Error::Parse {
                            line: lineno,
                            msg: format!("bad orientation {other:?}"),
                        })
                    }
                };
                let anchor = parse_kv(words.next(), "anchor")?;
                let side = parse_kv(words.next(), "side")?;
                let dirword = words.next().ok_or_else(|| Error::Parse {
                    line: lineno,
                    msg: "missing dir=<f|i>".into(),
                })?;
                let inverse = match dirword {
                    "dir=f" => false,
                    "dir=i" => true,
                    other => {
                        return Err(Error::Parse {
                            line: lineno,
                            msg: format!("expected dir=f or dir=i, found {other:?}"),
                        })
                    }
                };
                if anchor < 1 || side < 1 {
                    return Err(Error::Parse {
                        line: lineno,
                        msg: "anchor and side must be >= 1".into(),
                    });
                }
                moves.push(Move::HalfShear {
                    orientation,
                    anchor: (anchor - 1) as u32,
                    side: (side - 1) as u32,
                    inverse,
                });
            }
            other => {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("unknown directive {other:?}"),
                })
            }
        }
    }
    let hash = start_hash.ok_or_else(|| Error::Parse { line: 1, msg: "missing start line".into() })?;
    Ok((hash, MoveCertificate::from_moves(moves)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::Perm;

    #[test]
    fn surface_round_trip_is_byte_exact() {
        let t = Perm::from_transpositions(2, &[(0, 1)]);
        let s = Surface::new(t.clone(), t.clone(), t).unwrap();
        let text = emit_surface(&s);
        assert_eq!(text, "stsf 1\nn 2\nR 2 1\nG 2 1\nB 2 1\n");
        let back = parse_surface(&text).unwrap();
        assert_eq!(back, s);
        assert_eq!(emit_surface(&back), text);
        // Comments before the header are accepted.
        let with_comment = format!("# a torus\n{text}");
        assert_eq!(parse_surface(&with_comment).unwrap(), s);
    }

    #[test]
    fn parse_rejects_bad_input() {
        assert!(matches!(
            parse_surface("stsf 2\nn 1\nR 1\nG 1\nB 1\n"),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            parse_surface("stsf 1\nn 2\nR 2 2\nG 1 2\nB 1 2\n"),
            Err(Error::Parse { .. })
        ));
        // Non-involution is a domain error, not a parse error.
        assert!(parse_surface("stsf 1\nn 3\nR 2 3 1\nG 1 2 3\nB 1 2 3\n").is_err());
    }
}
