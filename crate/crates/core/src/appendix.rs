//! The 39 positive unimodular H-graph classes with their printed parameters.
//!
//! The table is embedded verbatim (including a non-normalized label tuple and
//! one `c` value that disagrees with its labels) and guarded by a SHA-256
//! checksum so accidental edits are caught at load time.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::plumbing::{canonicalize, HLabels};
use crate::theta::{FamilyParams, QuadraticForm2};
use crate::{Integer, Rational};

const DATA: &str = "\
index,b1,b2,b3,b4,b5,b6,sigma1,two_sigma2,sigma3,c_num,c_den,n1,n2,r1,s1,r2,s2,form
1,2,3,7,1,2,3,1,12,37,5,6,12,12,1,5,1,5,Q
2,2,7,4,1,5,2,21,140,235,47,70,28,20,5,9,3,7,Q
3,6,31,3,1,2,7,465,2604,3647,274,651,372,28,149,161,5,23,Q
4,7,18,3,1,2,7,45,252,353,53,126,252,28,101,115,5,9,Q
5,3,11,3,1,2,9,77,396,510,205,396,66,36,19,25,7,11,Q
6,2,19,3,1,2,11,171,836,1023,239,418,76,44,17,21,9,13,Q
7,2,3,3,1,2,27,25,108,117,37,54,12,108,1,5,25,29,Q
8,2,3,3,1,3,5,14,60,65,41,60,12,30,1,5,7,13,Q
9,2,11,3,1,3,4,55,264,318,155,264,44,24,9,13,5,11,Q
10,3,4,3,1,3,4,5,24,29,155,264,24,24,5,11,5,11,Q
11,3,7,2,1,3,97,1337,4074,3104,835,2037,42,582,11,17,191,197,Q
12,3,8,2,1,3,56,109,336,259,17,42,48,336,13,19,109,115,Q
13,3,47,2,1,3,17,1457,4794,3944,895,2397,282,102,91,97,31,37,Q
14,3,88,2,1,3,16,319,1056,874,391,1056,528,96,173,179,29,35,Q
15,4,5,2,1,3,47,1820,5640,4371,2263,5640,40,282,11,19,91,97,Q
16,4,77,2,1,3,11,532,1848,1605,635,1848,616,66,227,235,19,25,Q
17,5,16,2,1,3,11,1520,5280,4587,1813,5280,160,66,59,69,19,25,Q
18,7,92,2,1,3,8,2093,7728,7134,2365,7728,1288,48,545,559,13,19,Q
19,8,35,2,1,3,8,455,1680,1551,257,840,560,48,237,253,13,19,Q
20,11,16,2,1,3,8,286,1056,975,323,1056,352,48,149,171,13,19,Q
21,12,133,2,1,3,7,836,3192,3047,905,3192,3192,42,1451,1475,11,17,Q
22,13,72,2,1,3,7,3432,13104,12509,3715,13104,1872,42,851,877,11,17,Q
23,3,4,2,1,4,23,195,552,391,121,276,24,184,5,11,65,73,Q
24,3,10,2,1,4,9,115,360,282,143,360,60,72,17,23,23,31,Q
25,3,52,2,1,4,7,663,2184,1799,407,1092,312,56,101,107,17,25,Q
26,6,67,2,1,4,5,2211,8040,7310,2539,8040,804,40,329,341,11,19,Q1
27,2,7,2,1,4,77,227,616,418,279,616,28,616,5,9,227,235,Q
28,7,26,2,1,4,5,1001,3640,3310,1149,3640,364,40,149,163,11,19,Q
29,2,11,2,1,4,25,781,2200,1550,969,2200,44,200,9,13,71,79,Q
30,2,19,2,1,4,17,893,2584,1870,1113,2584,76,136,17,21,47,55,Q
31,2,71,2,1,4,13,2485,7384,5486,3105,7384,284,104,69,73,35,43,Q
32,3,7,2,1,5,7,69,210,160,43,105,42,70,11,17,23,33,Q
33,2,5,2,1,5,33,254,660,429,307,660,20,330,3,7,127,137,Q
34,2,7,2,1,5,16,413,1120,760,507,1120,28,160,5,9,59,69,Q
35,2,21,2,1,5,9,434,1260,915,541,1260,84,90,19,23,31,41,Q
36,2,55,2,1,5,8,297,880,652,371,880,220,80,53,57,27,37,Q
37,2,3,2,1,8,57,391,912,532,445,912,12,912,1,5,391,407,Q
38,2,3,2,1,9,32,247,576,336,281,576,12,576,1,5,247,265,Q
39,2,3,2,1,12,17,175,408,238,199,408,12,408,1,5,175,199,Q
";

const DATA_SHA256: &str = "1259c8838a72efa17453f44b6f4d921715136c4dd402b9b9fe4afb511bc00d19";

/// One raw row of the table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AppendixRow {
    pub index: usize,
    pub b1: i64,
    pub b2: i64,
    pub b3: i64,
    pub b4: i64,
    pub b5: i64,
    pub b6: i64,
    pub sigma1: i64,
    pub two_sigma2: i64,
    pub sigma3: i64,
    pub c_num: i64,
    pub c_den: i64,
    pub n1: i64,
    pub n2: i64,
    pub r1: i64,
    pub s1: i64,
    pub r2: i64,
    pub s2: i64,
    /// Name the form is printed under (`Q`, or `Q1` once).
    pub form: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AppendixEntry {
    pub index: usize,
    /// Canonical representative of the class.
    pub labels: HLabels,
    /// Labels as printed; differs from `labels` for one entry.
    pub printed_labels: HLabels,
    pub q: QuadraticForm2,
    pub c: Rational,
    pub params: FamilyParams,
    pub form_name: String,
}

impl AppendixEntry {
    fn from_row(r: &AppendixRow) -> Result<Self> {
        let printed = HLabels([r.b1, r.b2, r.b3, r.b4, r.b5, r.b6]);
        if r.c_den == 0 {
            return Err(Error::Invalid(format!("entry {}: zero denominator", r.index)));
        }
        Ok(Self {
            index: r.index,
            labels: canonicalize(&printed),
            printed_labels: printed,
            q: QuadraticForm2::from_i64(r.sigma1, r.two_sigma2, r.sigma3)?,
            c: Rational::new(Integer::from(r.c_num), Integer::from(r.c_den)),
            params: FamilyParams::from_i64(r.n1, r.n2, r.r1, r.s1, r.r2, r.s2),
            form_name: r.form.clone(),
        })
    }
}

fn digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Rows parsed from CSV with the embedded header.
pub fn parse_rows<R: Read>(r: R) -> Result<Vec<AppendixRow>> {
    let mut rd = csv::Reader::from_reader(r);
    rd.deserialize().map(|row| row.map_err(|e| Error::Invalid(e.to_string()))).collect()
}

pub fn write_rows<W: Write>(w: W, rows: &[AppendixRow]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in rows {
        wr.serialize(r).map_err(|e| Error::Invalid(e.to_string()))?;
    }
    wr.flush().map_err(|e| Error::Invalid(e.to_string()))
}

/// The embedded rows, after the checksum check.
pub fn appendix_rows() -> Result<Vec<AppendixRow>> {
    let found = digest(DATA.as_bytes());
    if found != DATA_SHA256 {
        return Err(Error::Checksum { expected: DATA_SHA256.into(), found });
    }
    parse_rows(DATA.as_bytes())
}

/// Entries from arbitrary rows; indices must be unique.
pub fn entries_from_rows(rows: &[AppendixRow]) -> Result<Vec<AppendixEntry>> {
    let mut seen = std::collections::BTreeSet::new();
    rows.iter()
        .map(|r| {
            if !seen.insert(r.index) {
                return Err(Error::Invalid(format!("duplicate entry index {}", r.index)));
            }
            AppendixEntry::from_row(r)
        })
        .collect()
}

/// The 39 embedded entries in printed order.
pub fn load_appendix() -> Result<Vec<AppendixEntry>> {
    entries_from_rows(&appendix_rows()?)
}
