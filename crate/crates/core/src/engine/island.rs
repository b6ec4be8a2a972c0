use std::fmt;

/// NLI type of an island, by how many interfering channels it involves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NliClass {
    Sci,
    Xci,
    Mci,
}

impl NliClass {
    pub const ALL: [NliClass; 3] = [NliClass::Sci, NliClass::Xci, NliClass::Mci];

    pub fn as_str(&self) -> &'static str {
        match self {
            NliClass::Sci => "SCI",
            NliClass::Xci => "XCI",
            NliClass::Mci => "MCI",
        }
    }

    pub fn index(&self) -> usize {
        match self {
            NliClass::Sci => 0,
            NliClass::Xci => 1,
            NliClass::Mci => 2,
        }
    }
}

impl fmt::Display for NliClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One `(kappa1, kappa2, l)` region of the integration domain of a COI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Island {
    pub kappa1: i32,
    pub kappa2: i32,
    pub l: i32,
    pub class: NliClass,
}

impl Island {
    /// Channel hosting the idler `f1 + f2 - f`: `kappa1 + kappa2 - kappa + l`.
    pub fn kappa4(&self, coi: i32) -> i32 {
        self.kappa1 + self.kappa2 - coi + self.l
    }
}

/// All islands of COI `kappa` on a grid of half-width `m`, ordered
/// lexicographically by `(kappa1, kappa2, l)`.
pub fn enumerate_islands(m: i32, kappa: i32) -> Vec<Island> {
    assert!(m >= 0 && kappa.abs() <= m, "COI {kappa} outside grid of half-width {m}");
    let mut out = Vec::new();
    for kappa1 in -m..=m {
        for kappa2 in -m..=m {
            for l in -1..=1 {
                let k4 = kappa1 + kappa2 - kappa + l;
                if (-m..=m).contains(&k4) {
                    out.push(Island {
                        kappa1,
                        kappa2,
                        l,
                        class: classify_island(kappa1, kappa2, l, kappa),
                    });
                }
            }
        }
    }
    out
}

/// SCI when only the COI is involved, XCI for one distinct interferer, MCI
/// for two or three.
pub fn classify_island(kappa1: i32, kappa2: i32, l: i32, kappa: i32) -> NliClass {
    let k4 = kappa1 + kappa2 - kappa + l;
    let mut others: Vec<i32> = [kappa1, kappa2, k4].into_iter().filter(|&c| c != kappa).collect();
    others.sort_unstable();
    others.dedup();
    match others.len() {
        0 => NliClass::Sci,
        1 => NliClass::Xci,
        _ => NliClass::Mci,
    }
}
