//! Resource lists: positioned, typed, URL-bearing page elements.
//!
//! A resource list is the structure that tells a generator (and the
//! evaluator) which regions of a design image are links, backend routes, or
//! images, and where they point. The JSON wire shape is the same one embedded
//! in generation prompts:
//!
//! ```json
//! {"origin": "https://a.com", "width": 1280, "height": 800,
//!  "entries": [{"position": [[0, 0], [100, 20]], "type": "internal-link",
//!               "url": "https://a.com/about", "text": "About"}]}
//! ```

use std::fmt;
use std::str::FromStr;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use url::Url;

use crate::error::{Error, Result};

/// Axis-aligned box in CSS pixels, origin at the page's top-left corner.
///
/// Boxes are plain values; invariants are checked by [`ResourceList::validate`]
/// so that malformed input can still be loaded and reported on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
}

impl BoundingBox {
    pub const fn new(x1: f64, y1: f64, x2: f64, y2: f64) -> Self {
        Self { x1, y1, x2, y2 }
    }

    pub fn width(&self) -> f64 {
        self.x2 - self.x1
    }

    pub fn height(&self) -> f64 {
        self.y2 - self.y1
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> (f64, f64) {
        ((self.x1 + self.x2) / 2.0, (self.y1 + self.y2) / 2.0)
    }

    pub fn is_finite(&self) -> bool {
        [self.x1, self.y1, self.x2, self.y2].iter().all(|v| v.is_finite())
    }

    pub fn is_ordered(&self) -> bool {
        self.x1 <= self.x2 && self.y1 <= self.y2
    }

    pub fn is_non_negative(&self) -> bool {
        [self.x1, self.y1, self.x2, self.y2].iter().all(|&v| v >= 0.0)
    }

    /// Whether the box satisfies every [`BoundingBox`] invariant.
    pub fn is_valid(&self) -> bool {
        self.is_finite() && self.is_ordered() && self.is_non_negative()
    }

    pub fn within(&self, width: f64, height: f64) -> bool {
        self.x1 >= 0.0 && self.y1 >= 0.0 && self.x2 <= width && self.y2 <= height
    }

    /// Clamps every coordinate into `[0, width] x [0, height]`.
    pub fn clamped(&self, width: f64, height: f64) -> Self {
        let cx = |v: f64| v.clamp(0.0, width);
        let cy = |v: f64| v.clamp(0.0, height);
        Self::new(cx(self.x1), cy(self.y1), cx(self.x2), cy(self.y2))
    }
}

impl Serialize for BoundingBox {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        [[self.x1, self.y1], [self.x2, self.y2]].serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for BoundingBox {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let [[x1, y1], [x2, y2]] = <[[f64; 2]; 2]>::deserialize(deserializer)?;
        Ok(Self::new(x1, y1, x2, y2))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ResourceKind {
    InternalLink,
    ExternalLink,
    BackendRoute,
    Image,
    BackgroundImage,
}

impl ResourceKind {
    pub const ALL: [ResourceKind; 5] = [
        ResourceKind::InternalLink,
        ResourceKind::ExternalLink,
        ResourceKind::BackendRoute,
        ResourceKind::Image,
        ResourceKind::BackgroundImage,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ResourceKind::InternalLink => "internal-link",
            ResourceKind::ExternalLink => "external-link",
            ResourceKind::BackendRoute => "backend-route",
            ResourceKind::Image => "image",
            ResourceKind::BackgroundImage => "background-image",
        }
    }

    pub fn is_link(&self) -> bool {
        matches!(
            self,
            ResourceKind::InternalLink | ResourceKind::ExternalLink | ResourceKind::BackendRoute
        )
    }

    pub fn is_image(&self) -> bool {
        !self.is_link()
    }

    /// Link kinds interchange with each other, image kinds with each other.
    pub fn compatible_with(&self, other: ResourceKind) -> bool {
        self.is_link() == other.is_link()
    }
}

impl fmt::Display for ResourceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ResourceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ResourceKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::UnknownKind(s.to_string()))
    }
}

impl Serialize for ResourceKind {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for ResourceKind {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(D::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourceEntry {
    pub position: BoundingBox,
    #[serde(rename = "type")]
    pub kind: ResourceKind,
    pub url: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
}

impl ResourceEntry {
    pub fn new(position: BoundingBox, kind: ResourceKind, url: impl Into<String>) -> Self {
        Self {
            position,
            kind,
            url: url.into(),
            text: None,
        }
    }

    pub fn with_text(mut self, text: impl Into<String>) -> Self {
        self.text = Some(text.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourceList {
    pub origin: String,
    pub width: f64,
    pub height: f64,
    pub entries: Vec<ResourceEntry>,
}

/// One broken invariant found by [`ResourceList::validate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "violation", rename_all = "kebab-case")]
pub enum Violation {
    NonPositiveDimensions { width: f64, height: f64 },
    InvalidOrigin { origin: String },
    NonFiniteCoordinate { entry: usize },
    NegativeCoordinate { entry: usize },
    BoxOrder { entry: usize },
    EmptyUrl { entry: usize },
    OutOfBounds { entry: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonPositiveDimensions { width, height } => {
                write!(f, "page dimensions must be positive, got {width}x{height}")
            }
            Violation::InvalidOrigin { origin } => write!(f, "origin {origin:?} is not an absolute URL"),
            Violation::NonFiniteCoordinate { entry } => write!(f, "entry {entry}: non-finite coordinate"),
            Violation::NegativeCoordinate { entry } => write!(f, "entry {entry}: negative coordinate"),
            Violation::BoxOrder { entry } => write!(f, "entry {entry}: box corners out of order"),
            Violation::EmptyUrl { entry } => write!(f, "entry {entry}: empty url"),
            Violation::OutOfBounds { entry } => write!(f, "entry {entry}: box extends past the page"),
        }
    }
}

impl ResourceList {
    pub fn new(origin: impl Into<String>, width: f64, height: f64) -> Self {
        Self {
            origin: origin.into(),
            width,
            height,
            entries: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Checks every invariant and returns the violations found, in entry order.
    ///
    /// An empty report means the list is well formed.
    pub fn validate(&self) -> Vec<Violation> {
        let mut report = Vec::new();
        if !(self.width > 0.0 && self.height > 0.0) || !self.width.is_finite() || !self.height.is_finite() {
            report.push(Violation::NonPositiveDimensions {
                width: self.width,
                height: self.height,
            });
        }
        if Url::parse(&self.origin).is_err() {
            report.push(Violation::InvalidOrigin {
                origin: self.origin.clone(),
            });
        }
        for (entry, e) in self.entries.iter().enumerate() {
            let b = &e.position;
            if !b.is_finite() {
                report.push(Violation::NonFiniteCoordinate { entry });
            } else {
                if !b.is_non_negative() {
                    report.push(Violation::NegativeCoordinate { entry });
                }
                if !b.is_ordered() {
                    report.push(Violation::BoxOrder { entry });
                }
                if b.is_non_negative() && !b.within(self.width, self.height) {
                    report.push(Violation::OutOfBounds { entry });
                }
            }
            if e.url.trim().is_empty() {
                report.push(Violation::EmptyUrl { entry });
            }
        }
        report
    }

    /// Like [`validate`](Self::validate) but ignores out-of-bounds boxes,
    /// which are clamped for geometry rather than rejected.
    pub fn hard_violations(&self) -> Vec<Violation> {
        self.validate()
            .into_iter()
            .filter(|v| !matches!(v, Violation::OutOfBounds { .. }))
            .collect()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Canonical file form: two-space pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("resource list serializes");
        out.push('\n');
        out
    }

    /// The entry list alone, as embedded in generation prompts.
    pub fn entries_json(&self) -> String {
        serde_json::to_string_pretty(&self.entries).expect("entries serialize")
    }
}

/// Resolves `raw` against `origin` and canonicalizes it.
///
/// Scheme and host are lowercased, default ports dropped, fragments removed,
/// and trailing slashes stripped from non-root paths. Query strings are kept.
pub fn normalize_url(raw: &str, origin: &str) -> Result<String> {
    let base = Url::parse(origin).map_err(|_| Error::Url(origin.to_string()))?;
    let mut url = base.join(raw.trim()).map_err(|_| Error::Url(raw.to_string()))?;
    url.set_fragment(None);
    if url.has_authority() {
        let path = url.path();
        if path.len() > 1 && path.ends_with('/') {
            let trimmed = path.trim_end_matches('/');
            let trimmed = if trimmed.is_empty() { "/" } else { trimmed }.to_string();
            url.set_path(&trimmed);
        }
    }
    Ok(url.to_string())
}

/// Default path prefixes that mark a same-host URL as a backend route.
pub const DEFAULT_ROUTE_PREFIXES: &[&str] = &["/api"];

/// Classifies a normalized link target relative to the page origin.
///
/// A prefix matches whole path segments: `/api` covers `/api` and `/api/x`
/// but not `/apiary`.
pub fn classify_link<S: AsRef<str>>(target: &str, origin: &str, route_prefixes: &[S]) -> ResourceKind {
    let (Ok(target), Ok(origin)) = (Url::parse(target), Url::parse(origin)) else {
        return ResourceKind::ExternalLink;
    };
    let same_host = match (target.host_str(), origin.host_str()) {
        (Some(a), Some(b)) => a.eq_ignore_ascii_case(b),
        _ => false,
    };
    if !same_host {
        return ResourceKind::ExternalLink;
    }
    let path = target.path();
    let is_route = route_prefixes.iter().any(|prefix| {
        let prefix = prefix.as_ref().trim_end_matches('/');
        !prefix.is_empty()
            && path.starts_with(prefix)
            && matches!(path.as_bytes().get(prefix.len()), None | Some(b'/'))
    });
    if is_route {
        ResourceKind::BackendRoute
    } else {
        ResourceKind::InternalLink
    }
}
