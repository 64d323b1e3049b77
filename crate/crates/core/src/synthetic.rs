//! Deterministic synthetic data: an SSA-style corpus with drifting
//! name-gender associations, labeled subgroups sampled from it, and
//! authorship fixtures with prescribed per-group gender tallies.
//!
//! The real SSA files and the personally identified author sets are not
//! redistributable, so tests, examples and the calibration demo run on
//! these.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::calibration::LabeledAuthor;
use crate::cohort::{apportion, AuthorshipRecord};
use crate::error::{Error, Result};
use crate::inference::Gender;
use crate::ssa::{load_corpus, normalize, SsaCorpus};

pub const FEMALE_NAMES: &[&str] = &[
    "Mary", "Patricia", "Linda", "Barbara", "Elizabeth", "Jennifer", "Maria", "Susan", "Margaret",
    "Dorothy", "Lisa", "Nancy", "Karen", "Betty", "Helen", "Sandra", "Donna", "Carol", "Ruth",
    "Sharon", "Michelle", "Laura", "Sarah", "Kimberly", "Deborah", "Jessica", "Shirley", "Cynthia",
    "Angela", "Melissa", "Brenda", "Amy", "Anna", "Rebecca", "Virginia", "Kathleen", "Pamela",
    "Martha", "Debra", "Amanda",
];

pub const MALE_NAMES: &[&str] = &[
    "James", "John", "Robert", "Michael", "William", "David", "Richard", "Charles", "Joseph",
    "Thomas", "Christopher", "Daniel", "Paul", "Mark", "Donald", "George", "Kenneth", "Steven",
    "Edward", "Brian", "Ronald", "Anthony", "Kevin", "Jason", "Matthew", "Gary", "Timothy",
    "Jose", "Larry", "Jeffrey", "Frank", "Scott", "Eric", "Stephen", "Andrew", "Raymond",
    "Gregory", "Joshua", "Jerry", "Dennis",
];

/// Given names that never appear in the synthetic corpus.
pub const NON_SSA_NAMES: &[&str] = &[
    "Jukka", "Wojciech", "Xiaoming", "Sanjeev", "Kyung", "Hiroshi", "Dmitri", "Oddvar", "Tuomas",
    "Yannis", "Grzegorz", "Zhiwei", "Ravindra", "Mehmet", "Sigrun", "Ilkka",
];

/// Names whose association flips over the corpus span.
pub const UNISEX_NAMES: &[&str] = &[
    "Lynn", "Marion", "Kelly", "Tracy", "Dana", "Jamie", "Jordan", "Taylor", "Shannon", "Kim",
    "Robin", "Jody", "Stacy", "Carmen", "Courtney", "Kerry", "Shelby", "Casey", "Jackie", "Terry",
    "Lee", "Jean", "Frances", "Sidney",
];

const SURNAMES: &[&str] = &[
    "Smith", "Johnson", "Brown", "Taylor", "Miller", "Wilson", "Moore", "Anderson", "Thomas",
    "Jackson", "White", "Harris", "Martin", "Thompson", "Garcia", "Clark", "Lewis", "Robinson",
    "Walker", "Young", "Allen", "King", "Wright", "Scott", "Hill", "Green", "Adams", "Baker",
    "Nelson", "Carter", "Mitchell", "Roberts", "Turner", "Phillips", "Campbell", "Parker",
    "Evans", "Edwards", "Collins", "Stewart", "Morris", "Rogers", "Reed", "Cook", "Morgan",
    "Bell", "Murphy", "Bailey", "Cooper", "Richardson",
];

const ONSETS: &[&str] = &["B", "D", "K", "L", "M", "N", "R", "S", "T", "V", "Z", "Br", "Th"];
const NUCLEI: &[&str] = &["a", "e", "i", "o", "u", "ai", "ia"];
const CODAS: &[&str] = &["n", "l", "r", "s", "th", "ne", "ra", "lyn", "son"];

#[derive(Debug, Clone)]
pub struct CorpusSpec {
    pub first_year: i32,
    pub last_year: i32,
    pub seed: u64,
    /// Invented names with drifting associations, on top of [`UNISEX_NAMES`].
    /// Keep it even so every drifting name has a mirror partner.
    pub extra_drifting: usize,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec {
            first_year: 1880,
            last_year: 2000,
            seed: 1941,
            extra_drifting: 96,
        }
    }
}

#[derive(Debug, Clone)]
enum Trajectory {
    Fixed(Gender),
    /// p(F) follows a logistic curve centered on `midpoint`; `rising`
    /// means the name becomes female over time.
    Logistic { midpoint: f64, width: f64, rising: bool },
}

impl Trajectory {
    fn p_female(&self, year: i32) -> f64 {
        match *self {
            Trajectory::Fixed(g) => g.p_female(),
            Trajectory::Logistic {
                midpoint,
                width,
                rising,
            } => {
                let p = 1.0 / (1.0 + (-(year as f64 - midpoint) / width).exp());
                if rising {
                    p
                } else {
                    1.0 - p
                }
            }
        }
    }
}

struct NameModel {
    name: String,
    trajectory: Trajectory,
    base_total: f64,
    growth: f64,
}

fn invented_names(rng: &mut ChaCha8Rng, n: usize, taken: &HashSet<String>) -> Vec<String> {
    let mut out = Vec::with_capacity(n);
    let mut seen = taken.clone();
    while out.len() < n {
        let name = format!(
            "{}{}{}",
            ONSETS.choose(rng).unwrap(),
            NUCLEI.choose(rng).unwrap(),
            CODAS.choose(rng).unwrap()
        );
        if seen.insert(normalize(&name)) {
            out.push(name);
        }
    }
    out
}

/// Renders one `yobYYYY.txt` body per year of `spec`.
///
/// Leslie is pinned to 505 female and 1,557 male births in 1941 and
/// drifts female afterwards.
pub fn synthetic_ssa_files(spec: &CorpusSpec) -> Vec<(i32, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let span = (spec.last_year - spec.first_year) as f64;
    let mut models = Vec::new();
    for (names, g) in [(FEMALE_NAMES, Gender::Female), (MALE_NAMES, Gender::Male)] {
        for n in names {
            models.push(NameModel {
                name: n.to_string(),
                trajectory: Trajectory::Fixed(g),
                base_total: rng.gen_range(1_000.0..10_000.0),
                growth: rng.gen_range(-0.01..0.01),
            });
        }
    }
    let mut taken: HashSet<String> = models.iter().map(|m| normalize(&m.name)).collect();
    taken.extend(NON_SSA_NAMES.iter().map(|n| normalize(n)));
    taken.extend(UNISEX_NAMES.iter().map(|n| normalize(n)));
    taken.insert("leslie".into());
    let mut drifting: Vec<String> = UNISEX_NAMES.iter().map(|s| s.to_string()).collect();
    drifting.extend(invented_names(&mut rng, spec.extra_drifting, &taken));
    // Drifting names come in mirrored pairs, one turning female and one
    // turning male around the same year, with pair midpoints spread evenly
    // across the span. This keeps the corpus free of a net drift direction.
    let pairs = drifting.len() / 2;
    for (k, pair) in drifting.chunks(2).enumerate() {
        let position = 0.25 + 0.65 * (k as f64 + 0.5) / pairs.max(1) as f64;
        let midpoint = spec.first_year as f64 + position * span + rng.gen_range(-1.0..1.0);
        let width = rng.gen_range(2.0..6.0);
        let base_total = rng.gen_range(4_000.0..30_000.0);
        let growth = rng.gen_range(-0.01..0.01);
        for (i, name) in pair.iter().enumerate() {
            models.push(NameModel {
                name: name.clone(),
                trajectory: Trajectory::Logistic {
                    midpoint,
                    width,
                    rising: i == 0,
                },
                base_total,
                growth,
            });
        }
    }
    // p(1941) = 505/2062 on a curve of width 8.
    let leslie_mid = 1941.0 + 8.0 * (1557.0f64 / 505.0).ln();
    models.push(NameModel {
        name: "Leslie".into(),
        trajectory: Trajectory::Logistic {
            midpoint: leslie_mid,
            width: 8.0,
            rising: true,
        },
        base_total: 2062.0,
        growth: 0.0,
    });

    let mut files = Vec::new();
    for year in spec.first_year..=spec.last_year {
        let mut female_rows = Vec::new();
        let mut male_rows = Vec::new();
        for m in &models {
            let (f, ml) = if m.name == "Leslie" && year == 1941 {
                (505, 1557)
            } else {
                let noise: f64 = rng.gen_range(0.9..1.1);
                let t = year - spec.first_year;
                let total = m.base_total * (1.0 + m.growth).powi(t) * noise;
                let f = (total * m.trajectory.p_female(year)).round() as u64;
                let ml = (total.round() as u64).saturating_sub(f);
                (f, ml)
            };
            if f >= 5 {
                female_rows.push((f, m.name.as_str()));
            }
            if ml >= 5 {
                male_rows.push((ml, m.name.as_str()));
            }
        }
        // Published files list each sex by descending count.
        female_rows.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(b.1)));
        male_rows.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(b.1)));
        let mut text = String::new();
        for (c, n) in female_rows {
            text.push_str(&format!("{n},F,{c}\n"));
        }
        for (c, n) in male_rows {
            text.push_str(&format!("{n},M,{c}\n"));
        }
        files.push((year, text));
    }
    files
}

pub fn synthetic_corpus(spec: &CorpusSpec) -> SsaCorpus {
    load_corpus(synthetic_ssa_files(spec)).expect("generated corpus is well-formed")
}

/// Draws births from corpus year tables, weighted by count.
pub struct BirthSampler<'a> {
    corpus: &'a SsaCorpus,
    years: BTreeMap<i32, (Vec<(String, Gender)>, WeightedIndex<u64>)>,
}

impl<'a> BirthSampler<'a> {
    pub fn new(corpus: &'a SsaCorpus) -> Self {
        BirthSampler {
            corpus,
            years: BTreeMap::new(),
        }
    }

    /// A random (name, sex) born in `year`, or `None` when the year is not
    /// loaded.
    pub fn sample<R: Rng>(&mut self, year: i32, rng: &mut R) -> Option<(String, Gender)> {
        if !self.years.contains_key(&year) {
            let table = self.corpus.table(year)?;
            let mut births = Vec::new();
            let mut weights = Vec::new();
            for (name, c) in table.iter_sorted() {
                for (g, n) in [(Gender::Female, c.female), (Gender::Male, c.male)] {
                    if n > 0 {
                        births.push((name.to_string(), g));
                        weights.push(n);
                    }
                }
            }
            let index = WeightedIndex::new(&weights).ok()?;
            self.years.insert(year, (births, index));
        }
        let (births, index) = &self.years[&year];
        Some(births[index.sample(rng)].clone())
    }
}

/// Samples `size` labeled authors whose true birth year is
/// `publication_year - offset`, with publication years uniform over
/// `publication_years`.
pub fn synthesize_subgroup<R: Rng>(
    corpus: &SsaCorpus,
    size: usize,
    offset: i32,
    publication_years: std::ops::RangeInclusive<i32>,
    rng: &mut R,
) -> Result<Vec<LabeledAuthor>> {
    let years: Vec<i32> = publication_years
        .filter(|y| corpus.table(y - offset).is_some())
        .collect();
    if years.is_empty() {
        return Err(Error::Config(format!(
            "no publication year has a corpus table at offset {offset}"
        )));
    }
    let mut sampler = BirthSampler::new(corpus);
    let mut out = Vec::with_capacity(size);
    for _ in 0..size {
        let year = *years.choose(rng).unwrap();
        let (name, gender) = sampler
            .sample(year - offset, rng)
            .expect("year filtered above");
        out.push(LabeledAuthor::new(name, year, gender));
    }
    Ok(out)
}

/// Prescribed composition of one (group, year) cohort.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CohortTally {
    pub female: usize,
    pub male: usize,
    pub non_ssa: usize,
    pub initials_only: usize,
}

impl CohortTally {
    pub fn total(&self) -> usize {
        self.female + self.male + self.non_ssa + self.initials_only
    }
}

/// Builds authorship records realising the given tallies.
///
/// Female and male authors get single-sex corpus names, so any corpus from
/// [`synthetic_corpus`] classifies them exactly. Authors write one to
/// three articles each, articles have up to four authors, and roughly one
/// record in five omits the stable id.
pub fn synthetic_authorship(
    tallies: &BTreeMap<(String, i32), CohortTally>,
    seed: u64,
) -> Vec<AuthorshipRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut used_names = BTreeSet::new();
    let mut next_id = 0usize;
    let mut records = Vec::new();
    for ((group, year), tally) in tallies {
        let mut people: Vec<(String, Option<String>)> = Vec::new();
        let pools: [(&[&str], usize, bool); 4] = [
            (FEMALE_NAMES, tally.female, false),
            (MALE_NAMES, tally.male, false),
            (NON_SSA_NAMES, tally.non_ssa, false),
            (MALE_NAMES, tally.initials_only, true),
        ];
        for (pool, n, initials) in pools {
            for _ in 0..n {
                let name = loop {
                    let given = pool.choose(&mut rng).unwrap();
                    let middle = (b'A' + rng.gen_range(0..26u8)) as char;
                    let surname = SURNAMES.choose(&mut rng).unwrap();
                    let candidate = if initials {
                        format!("{}. {middle}. {surname}", &given[..1])
                    } else {
                        format!("{given} {middle}. {surname}")
                    };
                    if used_names.insert(candidate.clone()) {
                        break candidate;
                    }
                };
                next_id += 1;
                let id = rng.gen_bool(0.8).then(|| format!("A{next_id:06}"));
                people.push((name, id));
            }
        }
        people.shuffle(&mut rng);
        // Every author gets at least one article, some get more.
        let mut slots: Vec<usize> = Vec::new();
        for (i, _) in people.iter().enumerate() {
            let k = *[1, 1, 1, 2, 2, 3].choose(&mut rng).unwrap();
            slots.extend(std::iter::repeat_n(i, k));
        }
        slots.shuffle(&mut rng);
        let mut article = 0usize;
        let mut cursor = 0;
        while cursor < slots.len() {
            let width = rng.gen_range(1..=4).min(slots.len() - cursor);
            article += 1;
            let mut on_article = BTreeSet::new();
            for &p in &slots[cursor..cursor + width] {
                if !on_article.insert(p) {
                    continue;
                }
                let (name, id) = &people[p];
                records.push(AuthorshipRecord {
                    group_id: group.clone(),
                    year: *year,
                    article_id: format!("{group}-{year}-{article:04}"),
                    author_full_name: name.clone(),
                    author_stable_id: id.clone(),
                });
            }
            cursor += width;
        }
    }
    records
}

#[derive(Debug, Clone, Copy)]
pub struct GroupProfile {
    pub name: &'static str,
    /// Relative author population per analyzed year.
    pub size: [f64; 4],
    /// Target women's share per analyzed year, in percent.
    pub share: [f64; 4],
}

/// Thirteen groups modelled loosely on the 1960s ACM SIGs.
pub const SIG_PROFILES: [GroupProfile; 13] = [
    GroupProfile { name: "SIGACT", size: [20.0, 40.0, 60.0, 70.0], share: [3.0, 10.0, 12.0, 13.0] },
    GroupProfile { name: "SIGARCH", size: [20.0, 50.0, 90.0, 110.0], share: [2.0, 9.0, 11.0, 12.0] },
    GroupProfile { name: "SIGART", size: [30.0, 50.0, 80.0, 90.0], share: [2.0, 4.0, 9.0, 16.0] },
    GroupProfile { name: "SIGCOMM", size: [40.0, 80.0, 140.0, 190.0], share: [3.0, 11.0, 12.0, 13.0] },
    GroupProfile { name: "SIGCSE", size: [30.0, 80.0, 130.0, 160.0], share: [6.0, 18.0, 21.0, 24.0] },
    GroupProfile { name: "SIGDA", size: [20.0, 50.0, 80.0, 90.0], share: [2.0, 12.0, 12.0, 13.0] },
    GroupProfile { name: "SIGGRAPH", size: [40.0, 120.0, 180.0, 220.0], share: [3.0, 10.0, 12.0, 14.0] },
    GroupProfile { name: "SIGIR", size: [20.0, 40.0, 60.0, 80.0], share: [5.0, 15.0, 18.0, 19.0] },
    GroupProfile { name: "SIGMIS", size: [20.0, 40.0, 50.0, 60.0], share: [3.0, 5.0, 9.0, 17.0] },
    GroupProfile { name: "SIGOPS", size: [40.0, 90.0, 140.0, 160.0], share: [2.0, 10.0, 11.0, 12.0] },
    GroupProfile { name: "SIGPLAN", size: [60.0, 140.0, 200.0, 230.0], share: [3.0, 9.0, 10.0, 11.0] },
    GroupProfile { name: "SIGSIM", size: [20.0, 30.0, 50.0, 60.0], share: [2.0, 4.0, 8.0, 15.0] },
    GroupProfile { name: "SIGUCCS", size: [10.0, 60.0, 80.0, 90.0], share: [1.0, 36.0, 45.9, 45.1] },
];

pub const FIXTURE_YEARS: [i32; 4] = [1970, 1980, 1990, 2000];

/// Tallies for the thirteen-group fixture. Each analyzed year has
/// `authors_per_year` authors, of whom exactly `composite_pct` percent are
/// female; groups receive their share of both by largest remainder.
pub fn sig_fixture_tallies(
    authors_per_year: usize,
    composite_pct: [f64; 4],
) -> BTreeMap<(String, i32), CohortTally> {
    let mut out = BTreeMap::new();
    for (yi, &year) in FIXTURE_YEARS.iter().enumerate() {
        let sizes = apportion(
            authors_per_year,
            &SIG_PROFILES.iter().map(|p| p.size[yi]).collect::<Vec<_>>(),
        );
        let n_female = (authors_per_year as f64 * composite_pct[yi] / 100.0).round() as usize;
        let female_weights: Vec<f64> = SIG_PROFILES
            .iter()
            .zip(&sizes)
            .map(|(p, &s)| s as f64 * p.share[yi])
            .collect();
        let females = apportion(n_female, &female_weights);
        for (gi, p) in SIG_PROFILES.iter().enumerate() {
            let size = sizes[gi];
            let female = females[gi].min(size);
            let rest = size - female;
            // unidentified fraction grows from 4% to 16% across decades
            let unid = ((size as f64) * (0.04 + 0.04 * yi as f64)).round() as usize;
            let unid = unid.min(rest);
            let initials_only = unid / 4;
            out.insert(
                (p.name.to_string(), year),
                CohortTally {
                    female,
                    male: rest - unid,
                    non_ssa: unid - initials_only,
                    initials_only,
                },
            );
        }
    }
    out
}

/// The composite women's shares the bundled fixture reproduces.
pub const FIXTURE_COMPOSITE_PCT: [f64; 4] = [3.6, 12.4, 15.1, 17.3];
