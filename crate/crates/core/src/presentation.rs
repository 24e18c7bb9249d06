//! Finitely presented groups: words over signed generator indices.
//!
//! A letter is a nonzero `i32`: `+(g+1)` is generator `g`, `-(g+1)` its
//! inverse. Relators are stored exactly as produced (not freely reduced), so
//! length counts of spine presentations stay meaningful.

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Word = Vec<i32>;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PresentationError {
    #[error("letter {letter} refers to generator outside 0..{count}")]
    GeneratorOutOfRange { letter: i32, count: usize },
    #[error("zero is not a valid letter")]
    ZeroLetter,
}

/// Generator index of a letter.
#[inline]
pub fn gen_of(letter: i32) -> usize {
    (letter.unsigned_abs() - 1) as usize
}

/// The letter for generator `g` raised to `sign` (±1).
#[inline]
pub fn letter(g: usize, sign: i32) -> i32 {
    let l = g as i32 + 1;
    if sign < 0 {
        -l
    } else {
        l
    }
}

pub fn inverse(w: &[i32]) -> Word {
    w.iter().rev().map(|&l| -l).collect()
}

pub fn free_reduce(w: &[i32]) -> Word {
    let mut out: Word = Vec::with_capacity(w.len());
    for &l in w {
        if out.last() == Some(&-l) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    out
}

/// `w^k` for any integer k.
pub fn power(w: &[i32], k: i64) -> Word {
    let base = if k < 0 { inverse(w) } else { w.to_vec() };
    let mut out = Vec::with_capacity(base.len() * k.unsigned_abs() as usize);
    for _ in 0..k.unsigned_abs() {
        out.extend_from_slice(&base);
    }
    out
}

/// Exponent sum of each generator in `w`.
pub fn exponent_sums(w: &[i32], generator_count: usize) -> Vec<i64> {
    let mut v = vec![0i64; generator_count];
    for &l in w {
        v[gen_of(l)] += l.signum() as i64;
    }
    v
}

pub fn format_word(w: &[i32]) -> String {
    if w.is_empty() {
        return "1".to_string();
    }
    w.iter()
        .map(|&l| {
            if l > 0 {
                format!("g{}", l - 1)
            } else {
                format!("g{}^-1", -l - 1)
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Peripheral data: two words generating the image of the boundary torus
/// subgroup, their images in H1 = Z (`a`, `b`), and the longitude word.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Peripheral {
    pub x: Word,
    pub y: Word,
    pub a: i64,
    pub b: i64,
    pub longitude: Word,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupPresentation {
    pub generator_count: usize,
    pub relators: Vec<Word>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub peripheral: Option<Peripheral>,
}

impl GroupPresentation {
    pub fn new(generator_count: usize, relators: Vec<Word>) -> Result<Self, PresentationError> {
        let p = GroupPresentation { generator_count, relators, peripheral: None };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), PresentationError> {
        let words = self.relators.iter().chain(
            self.peripheral
                .iter()
                .flat_map(|p| [&p.x, &p.y, &p.longitude]),
        );
        for w in words {
            check_word(w, self.generator_count)?;
        }
        Ok(())
    }

    pub fn total_relator_length(&self) -> usize {
        self.relators.iter().map(Vec::len).sum()
    }

    /// Rows of exponent sums, one per relator.
    pub fn abelianized_matrix(&self) -> Vec<Vec<i64>> {
        self.relators
            .iter()
            .map(|r| exponent_sums(r, self.generator_count))
            .collect()
    }

    /// Tietze-simplify: repeatedly eliminate a generator that occurs exactly
    /// once in some relator, substituting its solution everywhere (peripheral
    /// words included). Empty relators are dropped. The result presents an
    /// isomorphic group.
    pub fn simplified(&self) -> GroupPresentation {
        self.simplified_with_map().0
    }

    /// As [`simplified`](Self::simplified), also returning for every old
    /// generator a word in the new generators representing it.
    pub fn simplified_with_map(&self) -> (GroupPresentation, Vec<Word>) {
        let mut gens: Vec<Option<Word>> = vec![None; self.generator_count];
        let mut order: Vec<usize> = Vec::new();
        let mut relators: Vec<Word> = self.relators.iter().map(|r| cyclic_reduce(r)).collect();
        let mut periph = self.peripheral.clone();
        loop {
            relators.retain(|r| !r.is_empty());
            let mut found = None;
            'search: for (ri, r) in relators.iter().enumerate() {
                // shortest relator first would be nicer; take the first hit for determinism
                for (pos, &l) in r.iter().enumerate() {
                    let g = gen_of(l);
                    if r.iter().filter(|&&m| gen_of(m) == g).count() == 1 {
                        found = Some((ri, pos, g));
                        break 'search;
                    }
                }
            }
            let Some((ri, pos, g)) = found else { break };
            let r = relators.remove(ri);
            // r = u l v = 1  =>  l = u^-1 v^-1  => g = (u^-1 v^-1)^sign
            let u = &r[..pos];
            let v = &r[pos + 1..];
            let mut sol: Word = inverse(u);
            sol.extend(inverse(v));
            if r[pos] < 0 {
                sol = inverse(&sol);
            }
            let sol = free_reduce(&sol);
            let subst = |w: &Word| -> Word {
                let mut out = Vec::new();
                for &m in w {
                    if gen_of(m) == g {
                        if m > 0 {
                            out.extend_from_slice(&sol);
                        } else {
                            out.extend(inverse(&sol));
                        }
                    } else {
                        out.push(m);
                    }
                }
                free_reduce(&out)
            };
            relators = relators.iter().map(|w| cyclic_reduce(&subst(w))).collect();
            if let Some(p) = periph.as_mut() {
                p.x = subst(&p.x);
                p.y = subst(&p.y);
                p.longitude = subst(&p.longitude);
            }
            gens[g] = Some(sol);
            order.push(g);
        }
        // renumber surviving generators
        let mut map = vec![usize::MAX; self.generator_count];
        let mut next = 0;
        for (g, s) in gens.iter().enumerate() {
            if s.is_none() {
                map[g] = next;
                next += 1;
            }
        }
        let rename = |w: &Word| -> Word {
            w.iter()
                .map(|&m| letter(map[gen_of(m)], m.signum()))
                .collect()
        };
        // later eliminations only refer to generators still alive at that
        // point, so resolve in reverse elimination order
        let mut expr: Vec<Word> = (0..self.generator_count)
            .map(|g| if gens[g].is_none() { vec![letter(map[g], 1)] } else { Vec::new() })
            .collect();
        for &g in order.iter().rev() {
            let mut w = Vec::new();
            for &m in gens[g].as_ref().unwrap() {
                let e = &expr[gen_of(m)];
                if m > 0 {
                    w.extend_from_slice(e);
                } else {
                    w.extend(inverse(e));
                }
            }
            expr[g] = free_reduce(&w);
        }
        let simplified = GroupPresentation {
            generator_count: next,
            relators: relators.iter().map(rename).collect(),
            peripheral: periph.map(|p| Peripheral {
                x: rename(&p.x),
                y: rename(&p.y),
                longitude: rename(&p.longitude),
                a: p.a,
                b: p.b,
            }),
        };
        (simplified, expr)
    }
}

pub fn check_word(w: &[i32], count: usize) -> Result<(), PresentationError> {
    for &l in w {
        if l == 0 {
            return Err(PresentationError::ZeroLetter);
        }
        if gen_of(l) >= count {
            return Err(PresentationError::GeneratorOutOfRange { letter: l, count });
        }
    }
    Ok(())
}

pub fn cyclic_reduce(w: &[i32]) -> Word {
    let mut r = free_reduce(w);
    while r.len() >= 2 && r[0] == -r[r.len() - 1] {
        r.pop();
        r.remove(0);
    }
    r
}
