use std::collections::HashMap;

/// Shared blocks of two units plus the exact tiling of each.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    pub common: Vec<String>,
    pub tiling1: Vec<String>,
    pub tiling2: Vec<String>,
}

impl Decomposition {
    pub fn shared_len(&self) -> usize {
        self.common.iter().map(|c| c.chars().count()).sum()
    }
}

type Block = (usize, usize, usize);
type Best = Option<((usize, usize), Vec<Block>)>;

struct Search<'a> {
    u1: &'a [char],
    u2: &'a [char],
    l_min: usize,
    memo: HashMap<(usize, usize, bool), Best>,
}

impl Search<'_> {
    fn gap_ok(&self, g: usize) -> bool {
        g == 0 || g >= self.l_min
    }

    /// `after` forbids a block starting exactly at (i, j), which would merely extend the previous one.
    fn best(&mut self, i: usize, j: usize, after: bool) -> Best {
        if let Some(b) = self.memo.get(&(i, j, after)) {
            return b.clone();
        }
        let (n1, n2) = (self.u1.len(), self.u2.len());
        let mut res: Best = None;
        if self.gap_ok(n1 - i) && self.gap_ok(n2 - j) {
            res = Some(((0, 0), Vec::new()));
        }
        for a in i..n1 {
            if !self.gap_ok(a - i) {
                continue;
            }
            for b in j..n2 {
                if !self.gap_ok(b - j) || (after && a == i && b == j) {
                    continue;
                }
                let mut len = 0;
                while a + len < n1 && b + len < n2 && self.u1[a + len] == self.u2[b + len] {
                    len += 1;
                    if len < self.l_min {
                        continue;
                    }
                    let Some(((total, count), rest)) = self.best(a + len, b + len, true) else {
                        continue;
                    };
                    let score = (total + len, count + 1);
                    if res.as_ref().is_none_or(|(s, _)| score > *s) {
                        let mut blocks = vec![(a, b, len)];
                        blocks.extend(rest);
                        res = Some((score, blocks));
                    }
                }
            }
        }
        self.memo.insert((i, j, after), res.clone());
        res
    }
}

fn tiling(u: &[char], blocks: &[Block], second: bool) -> Vec<String> {
    let mut parts = Vec::new();
    let mut pos = 0;
    for &(a, b, len) in blocks {
        let s = if second { b } else { a };
        if s > pos {
            parts.push(u[pos..s].iter().collect());
        }
        parts.push(u[s..s + len].iter().collect());
        pos = s + len;
    }
    if pos < u.len() {
        parts.push(u[pos..].iter().collect());
    }
    parts
}

/// Tile both units into blocks of at least `l_min` symbols maximizing the shared total length.
///
/// Blocks are maximal. Ties go to more shared blocks, then to the leftmost alignment. `None` when nothing can be shared.
pub fn decompose_units(u1: &str, u2: &str, l_min: usize) -> Option<Decomposition> {
    let c1: Vec<char> = u1.chars().collect();
    let c2: Vec<char> = u2.chars().collect();
    let mut search = Search { u1: &c1, u2: &c2, l_min, memo: HashMap::new() };
    let ((total, _), blocks) = search.best(0, 0, false)?;
    if total == 0 {
        return None;
    }
    Some(Decomposition {
        common: blocks.iter().map(|&(a, _, len)| c1[a..a + len].iter().collect()).collect(),
        tiling1: tiling(&c1, &blocks, false),
        tiling2: tiling(&c2, &blocks, true),
    })
}
