use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Sets S_1..S_n covering {1..m}; each set is stored sorted, 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CoveringSequence {
    m: usize,
    sets: Vec<Vec<usize>>,
}

impl CoveringSequence {
    pub fn new(m: usize, sets: Vec<Vec<usize>>) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument("m must be positive".into()));
        }
        let mut covered = vec![false; m];
        let mut norm = Vec::with_capacity(sets.len());
        for s in sets {
            let mut s = s;
            s.sort_unstable();
            s.dedup();
            if s.is_empty() {
                return Err(Error::InvalidArgument("sets must be non-empty".into()));
            }
            for &j in &s {
                if j == 0 || j > m {
                    return Err(Error::InvalidArgument(format!("index {j} outside 1..={m}")));
                }
                covered[j - 1] = true;
            }
            norm.push(s);
        }
        if let Some(j) = covered.iter().position(|c| !c) {
            return Err(Error::InvalidArgument(format!("index {} is not covered", j + 1)));
        }
        Ok(CoveringSequence { m, sets: norm })
    }

    /// Parses "1,2;2,3;1,3"; m is the largest index present.
    pub fn parse(text: &str) -> Result<Self> {
        let mut sets = Vec::new();
        for part in text.trim().split(';') {
            let set = part
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<usize>()
                        .map_err(|_| Error::Parse(format!("bad index {:?} in {:?}", t.trim(), text)))
                })
                .collect::<Result<Vec<_>>>()?;
            sets.push(set);
        }
        let m = sets.iter().flatten().copied().max().unwrap_or(0);
        Self::new(m, sets)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.sets.len()
    }

    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }

    /// k_j = number of sets containing j, for j = 1..m.
    pub fn incidence(&self) -> Vec<usize> {
        let mut k = vec![0; self.m];
        for s in &self.sets {
            for &j in s {
                k[j - 1] += 1;
            }
        }
        k
    }

    pub fn min_incidence(&self) -> usize {
        self.incidence().into_iter().min().unwrap_or(0)
    }

    pub fn beta(&self) -> usize {
        self.sets.iter().map(|s| s.len()).sum()
    }

    fn is_standard(&self) -> bool {
        let proper_subset = self.sets.iter().any(|a| self.sets.iter().any(|b| a.len() < b.len() && is_subset(a, b)));
        !proper_subset && self.index_classes().len() == self.m
    }

    /// Groups indices by the set of positions containing them.
    fn index_classes(&self) -> BTreeMap<Vec<usize>, Vec<usize>> {
        let mut classes: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
        for j in 1..=self.m {
            let pattern: Vec<usize> = (0..self.sets.len()).filter(|&i| self.sets[i].contains(&j)).collect();
            classes.entry(pattern).or_default().push(j);
        }
        classes
    }
}

fn is_subset(a: &[usize], b: &[usize]) -> bool {
    a.iter().all(|x| b.binary_search(x).is_ok())
}

impl FromStr for CoveringSequence {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

impl fmt::Display for CoveringSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .sets
            .iter()
            .map(|s| s.iter().map(|j| j.to_string()).collect::<Vec<_>>().join(","))
            .collect();
        write!(f, "{}", parts.join(";"))
    }
}

/// Absorbs every set into a maximal proper superset, merges indices that lie in
/// exactly the same sets, and relabels the surviving classes 1..l in order of
/// their smallest member.
pub fn standard_form(u: &CoveringSequence) -> CoveringSequence {
    let mut sets = u.sets.clone();
    loop {
        let mut changed = false;
        for i in 0..sets.len() {
            // the first superset that is itself not properly contained in another set
            let sup = (0..sets.len())
                .filter(|&k| sets[i].len() < sets[k].len() && is_subset(&sets[i], &sets[k]))
                .find(|&k| !sets.iter().any(|b| sets[k].len() < b.len() && is_subset(&sets[k], b)));
            if let Some(k) = sup {
                sets[i] = sets[k].clone();
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let absorbed = CoveringSequence { m: u.m, sets };
    let classes = absorbed.index_classes();
    let mut reps: Vec<(usize, Vec<usize>)> = classes.into_values().map(|members| (members[0], members)).collect();
    reps.sort();
    let mut label = vec![0usize; u.m + 1];
    for (new, (_, members)) in reps.iter().enumerate() {
        for &j in members {
            label[j] = new + 1;
        }
    }
    let sets = absorbed
        .sets
        .iter()
        .map(|s| {
            let mut t: Vec<usize> = s.iter().map(|&j| label[j]).collect();
            t.sort_unstable();
            t.dedup();
            t
        })
        .collect();
    let out = CoveringSequence { m: reps.len(), sets };
    debug_assert!(out.is_standard());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cs(s: &str) -> CoveringSequence {
        CoveringSequence::parse(s).unwrap()
    }

    #[test]
    fn parse_and_display() {
        let u = cs("1,2; 2,3;1,3");
        assert_eq!(u.m(), 3);
        assert_eq!(u.to_string(), "1,2;2,3;1,3");
        assert_eq!(u.incidence(), vec![2, 2, 2]);
        assert_eq!(u.min_incidence(), 2);
        assert_eq!(u.beta(), 6);
        assert!(CoveringSequence::parse("1,x").is_err());
        assert!(CoveringSequence::new(3, vec![vec![1], vec![2]]).is_err());
        assert!(CoveringSequence::parse("0,1").is_err());
    }

    #[test]
    fn standard_form_examples() {
        assert_eq!(standard_form(&cs("1,2;1;2")).to_string(), "1;1;1");
        assert_eq!(standard_form(&cs("1,2,3;2,3;3")).to_string(), "1;1;1");
        assert_eq!(standard_form(&cs("1,2;2,3;1,3")), cs("1,2;2,3;1,3"));
        assert_eq!(standard_form(&cs("1,2,4;2,3,4;1,3,4")).to_string(), "1,2,4;2,3,4;1,3,4");
        // 4 rides along with 3 everywhere
        assert_eq!(standard_form(&cs("1,2;2,3,4;1,3,4")).to_string(), "1,2;2,3;1,3");
    }

    #[test]
    fn standard_form_never_lowers_incidence() {
        for s in ["1,2;1;2", "1;1,2;2,3;3", "1,2,3;1;2;3", "1,2;2;3;1,3"] {
            let u = cs(s);
            let v = standard_form(&u);
            assert!(v.min_incidence() >= u.min_incidence(), "{s}");
            assert!(v.is_standard());
            assert_eq!(standard_form(&v), v);
        }
    }
}
