//! Dataset construction from saved HTML.
//!
//! Parsing is error tolerant (html5ever via kuchikiki); every transform takes
//! a document by value and returns the rewritten document.

use std::sync::LazyLock;

use kuchikiki::traits::TendrilSink;
use kuchikiki::NodeRef;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use regex::{Captures, Regex};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::resource::{classify_link, normalize_url, BoundingBox, ResourceEntry, ResourceKind, ResourceList};

/// A parsed HTML document together with the text it was parsed from.
pub struct HtmlDocument {
    source: String,
    root: NodeRef,
}

impl HtmlDocument {
    pub fn parse(source: &str) -> Self {
        Self {
            source: source.to_string(),
            root: kuchikiki::parse_html().one(source),
        }
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn root(&self) -> &NodeRef {
        &self.root
    }

    /// Serializes the current tree.
    pub fn to_html(&self) -> String {
        self.root.to_string()
    }

    pub fn node_count(&self) -> usize {
        self.root.descendants().count()
    }

    fn elements<'a>(&'a self, tag: &'a str) -> impl Iterator<Item = NodeRef> + 'a {
        self.root
            .descendants()
            .filter(move |n| n.as_element().is_some_and(|e| &*e.name.local == tag))
    }
}

impl std::fmt::Debug for HtmlDocument {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HtmlDocument").field("html", &self.to_html()).finish()
    }
}

fn tag_name(node: &NodeRef) -> Option<String> {
    node.as_element().map(|e| e.name.local.to_string())
}

fn attr(node: &NodeRef, name: &str) -> Option<String> {
    node.as_element()
        .and_then(|e| e.attributes.borrow().get(name).map(str::to_string))
}

/// Splits an inline style attribute into lowercase `(property, value)` pairs.
fn declarations(style: &str) -> impl Iterator<Item = (String, String)> + '_ {
    style.split(';').filter_map(|decl| {
        let (prop, value) = decl.split_once(':')?;
        let value = value.trim().to_ascii_lowercase();
        let value = value.trim_end_matches("!important").trim().to_string();
        Some((prop.trim().to_ascii_lowercase(), value))
    })
}

/// Hidden by the `hidden` attribute or by inline `display:none` /
/// `visibility:hidden`.
pub fn is_inline_hidden(node: &NodeRef) -> bool {
    let Some(el) = node.as_element() else {
        return false;
    };
    let attrs = el.attributes.borrow();
    if attrs.contains("hidden") {
        return true;
    }
    attrs.get("style").is_some_and(|style| {
        declarations(style).any(|(p, v)| (p == "display" && v == "none") || (p == "visibility" && v == "hidden"))
    })
}

fn is_unwanted_metadata(node: &NodeRef) -> bool {
    match tag_name(node).as_deref() {
        Some("meta") => {
            let keep_charset = attr(node, "charset").is_some()
                || attr(node, "http-equiv").is_some_and(|v| v.eq_ignore_ascii_case("content-type"));
            let keep_viewport = attr(node, "name").is_some_and(|v| v.eq_ignore_ascii_case("viewport"));
            !(keep_charset || keep_viewport)
        }
        Some("link") => !attr(node, "rel").is_some_and(|rel| {
            rel.split_ascii_whitespace().any(|t| t.eq_ignore_ascii_case("stylesheet"))
        }),
        Some("base") => true,
        _ => false,
    }
}

fn should_remove(node: &NodeRef) -> bool {
    if node.as_comment().is_some() {
        return true;
    }
    matches!(tag_name(node).as_deref(), Some("script" | "noscript")) || is_unwanted_metadata(node) || is_inline_hidden(node)
}

fn preserves_whitespace(node: &NodeRef) -> bool {
    node.ancestors()
        .any(|a| matches!(tag_name(&a).as_deref(), Some("pre" | "textarea" | "listing" | "plaintext")))
}

fn merge_adjacent_text(root: &NodeRef) {
    let parents: Vec<NodeRef> = root.inclusive_descendants().filter(|n| n.first_child().is_some()).collect();
    for parent in parents {
        let mut child = parent.first_child();
        while let Some(node) = child {
            let next = node.next_sibling();
            if let (Some(text), Some(next_node)) = (node.as_text(), next.as_ref()) {
                if let Some(next_text) = next_node.as_text() {
                    let appended = next_text.borrow().clone();
                    text.borrow_mut().push_str(&appended);
                    next_node.detach();
                    child = Some(node);
                    continue;
                }
            }
            child = next;
        }
    }
}

/// Strips what a renderer would not show and what generation does not need.
///
/// Removes comments, `script`/`noscript`, inline-hidden subtrees, and head
/// metadata other than charset, viewport, title, styles and stylesheets.
/// Whitespace-only text between elements collapses to one space (dropped
/// directly under `html` and `head`). Running it twice changes nothing.
pub fn simplify_html(doc: HtmlDocument) -> HtmlDocument {
    let doomed: Vec<NodeRef> = doc.root.descendants().filter(should_remove).collect();
    for node in doomed {
        node.detach();
    }
    merge_adjacent_text(&doc.root);

    let texts: Vec<NodeRef> = doc.root.descendants().filter(|n| n.as_text().is_some()).collect();
    for node in texts {
        let text = node.as_text().expect("text node");
        if !text.borrow().chars().all(char::is_whitespace) || preserves_whitespace(&node) {
            continue;
        }
        let parent_tag = node.parent().as_ref().and_then(tag_name);
        if matches!(parent_tag.as_deref(), Some("html" | "head")) || text.borrow().is_empty() {
            node.detach();
        } else {
            *text.borrow_mut() = " ".to_string();
        }
    }
    doc
}

/// Points every `<a href>` at a URL drawn uniformly from `url_pool`.
///
/// Anchors are visited in document order and draws come from a ChaCha8
/// generator seeded with `seed`; nothing else in the document changes.
pub fn insert_links(doc: HtmlDocument, url_pool: &[String], seed: u64) -> Result<HtmlDocument> {
    if url_pool.is_empty() {
        return Err(Error::EmptyInput("url pool"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for anchor in doc.elements("a").collect::<Vec<_>>() {
        let el = anchor.as_element().expect("element");
        let mut attrs = el.attributes.borrow_mut();
        if let Some(href) = attrs.get_mut("href") {
            *href = url_pool[rng.random_range(0..url_pool.len())].clone();
        }
    }
    Ok(doc)
}

/// Result of [`replace_images`].
#[derive(Debug)]
pub struct ImageReplacement {
    pub document: HtmlDocument,
    /// `(old, new)` URL per replaced reference, in document order.
    pub assignments: Vec<(String, String)>,
    pub warnings: Vec<String>,
}

struct ImageSupply<'a> {
    map: &'a [String],
    order: Vec<usize>,
    next: usize,
    cycle: usize,
    rng: ChaCha8Rng,
    warnings: Vec<String>,
}

impl<'a> ImageSupply<'a> {
    fn new(map: &'a [String], seed: u64) -> Self {
        Self {
            map,
            order: (0..map.len()).collect(),
            next: 0,
            cycle: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
            warnings: Vec::new(),
        }
    }

    fn take(&mut self) -> String {
        if self.next == self.order.len() {
            self.cycle += 1;
            self.order.shuffle(&mut self.rng);
            self.next = 0;
            self.warnings.push(format!(
                "image map exhausted after {} images; reusing entries (pass {})",
                self.cycle * self.map.len(),
                self.cycle + 1
            ));
        }
        let url = self.map[self.order[self.next]].clone();
        self.next += 1;
        url
    }
}

static CSS_URL: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r#"url\(\s*(?:"([^"]*)"|'([^']*)'|([^)'"\s]*))\s*\)"#).expect("valid regex"));

/// Rewrites `url(...)` references inside `background`/`background-image`
/// declarations, keeping each reference's quoting.
fn rewrite_background_urls(style: &str, supply: &mut ImageSupply<'_>, log: &mut Vec<(String, String)>) -> String {
    let mut out = String::with_capacity(style.len());
    for (i, decl) in style.split(';').enumerate() {
        if i > 0 {
            out.push(';');
        }
        let prop = decl.split_once(':').map(|(p, _)| p.trim().to_ascii_lowercase());
        if !matches!(prop.as_deref(), Some("background" | "background-image")) {
            out.push_str(decl);
            continue;
        }
        let replaced = CSS_URL.replace_all(decl, |caps: &Captures| {
            let new = supply.take();
            if let Some(old) = caps.get(1) {
                log.push((old.as_str().to_string(), new.clone()));
                format!("url(\"{new}\")")
            } else if let Some(old) = caps.get(2) {
                log.push((old.as_str().to_string(), new.clone()));
                format!("url('{new}')")
            } else {
                let old = caps.get(3).map_or("", |m| m.as_str());
                log.push((old.to_string(), new.clone()));
                format!("url({new})")
            }
        });
        out.push_str(&replaced);
    }
    out
}

/// Gives every `<img src>` and inline background image a unique URL from
/// `image_map`, in document order.
///
/// When the map runs out, assignment continues over a reshuffled copy of the
/// map (driven by `seed`) and a warning is recorded.
pub fn replace_images(doc: HtmlDocument, image_map: &[String], seed: u64) -> Result<ImageReplacement> {
    if image_map.is_empty() {
        return Err(Error::EmptyInput("image map"));
    }
    let mut supply = ImageSupply::new(image_map, seed);
    let mut assignments = Vec::new();
    let elements: Vec<NodeRef> = doc.root.descendants().filter(|n| n.as_element().is_some()).collect();
    for node in elements {
        let el = node.as_element().expect("element");
        let is_img = &*el.name.local == "img";
        let mut attrs = el.attributes.borrow_mut();
        if is_img {
            if let Some(src) = attrs.get_mut("src") {
                let new = supply.take();
                assignments.push((std::mem::replace(src, new.clone()), new));
            }
        }
        if let Some(style) = attrs.get_mut("style") {
            if CSS_URL.is_match(style) {
                let rewritten = rewrite_background_urls(style, &mut supply, &mut assignments);
                *style = rewritten;
            }
        }
    }
    Ok(ImageReplacement {
        document: doc,
        assignments,
        warnings: supply.warnings,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Viewport {
    pub width: f64,
    pub height: f64,
}

/// One measured DOM element as reported by the renderer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DumpElement {
    pub tag: String,
    #[serde(rename = "box")]
    pub bbox: BoundingBox,
    pub visible: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub href: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub src: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub background_image: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
}

/// Renderer output describing every element of a rendered page.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryDump {
    pub origin: String,
    pub viewport: Viewport,
    pub elements: Vec<DumpElement>,
}

impl GeometryDump {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.viewport.width > 0.0 && self.viewport.height > 0.0) {
            return Err(Error::InvalidDump {
                index: 0,
                message: format!("viewport {}x{} is not positive", self.viewport.width, self.viewport.height),
            });
        }
        for (index, el) in self.elements.iter().enumerate() {
            if !el.bbox.is_valid() {
                return Err(Error::InvalidDump {
                    index,
                    message: format!("invalid box {:?}", el.bbox),
                });
            }
        }
        Ok(())
    }
}

fn is_script_url(url: &str) -> bool {
    url.trim_start().to_ascii_lowercase().starts_with("javascript:")
}

/// Builds a resource list from the visible, positive-area elements of a dump.
///
/// Boxes are clamped to the viewport; elements with no area left are skipped.
pub fn extract_resources<S: AsRef<str>>(dump: &GeometryDump, route_prefixes: &[S]) -> Result<ResourceList> {
    dump.validate()?;
    let origin = normalize_url(&dump.origin, &dump.origin).map_err(|_| Error::InvalidDump {
        index: 0,
        message: format!("origin {:?} is not an absolute URL", dump.origin),
    })?;
    let (w, h) = (dump.viewport.width, dump.viewport.height);
    let mut list = ResourceList::new(origin.clone(), w, h);

    for (index, el) in dump.elements.iter().enumerate() {
        let position = el.bbox.clamped(w, h);
        if !el.visible || position.area() <= 0.0 {
            continue;
        }
        let normalize = |raw: &str| {
            normalize_url(raw, &origin).map_err(|e| Error::InvalidDump {
                index,
                message: e.to_string(),
            })
        };
        let tag = el.tag.to_ascii_lowercase();
        if tag == "a" {
            if let Some(href) = el.href.as_deref().filter(|h| !h.trim().is_empty() && !is_script_url(h)) {
                let url = normalize(href)?;
                let kind = classify_link(&url, &origin, route_prefixes);
                let mut entry = ResourceEntry::new(position, kind, url);
                entry.text = el.text.as_deref().map(str::trim).filter(|t| !t.is_empty()).map(str::to_string);
                list.entries.push(entry);
            }
        }
        if tag == "img" {
            if let Some(src) = el.src.as_deref().filter(|s| !s.trim().is_empty()) {
                list.entries.push(ResourceEntry::new(position, ResourceKind::Image, normalize(src)?));
            }
        }
        if let Some(bg) = el.background_image.as_deref().filter(|s| !s.trim().is_empty()) {
            list.entries.push(ResourceEntry::new(position, ResourceKind::BackgroundImage, normalize(bg)?));
        }
    }
    debug_assert!(list.validate().is_empty());
    Ok(list)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simplify(src: &str) -> String {
        simplify_html(HtmlDocument::parse(src)).to_html()
    }

    fn count(doc: &HtmlDocument, pred: impl Fn(&NodeRef) -> bool) -> usize {
        doc.root().descendants().filter(|n| pred(n)).count()
    }

    #[test]
    fn removes_comments_and_scripts() {
        let doc = simplify_html(HtmlDocument::parse(
            "<html><body><!-- note --><p>Hi</p><script>alert(1)</script></body></html>",
        ));
        assert_eq!(count(&doc, |n| n.as_comment().is_some()), 0);
        assert_eq!(count(&doc, |n| tag_name(n).as_deref() == Some("script")), 0);
        assert!(doc.to_html().contains("<p>Hi</p>"));
    }

    #[test]
    fn removes_hidden_subtrees() {
        let out = simplify(
            r#"<body><div style="color:red; DISPLAY : none !important"><p>gone</p></div><span hidden>x</span>
            <i style="visibility:hidden">y</i><b>kept</b></body>"#,
        );
        assert!(!out.contains("gone") && !out.contains(">x<") && !out.contains(">y<"));
        assert!(out.contains("<b>kept</b>"));
    }

    #[test]
    fn keeps_only_useful_metadata() {
        let out = simplify(
            r#"<html><head><meta charset="utf-8"><meta name="viewport" content="width=device-width">
            <meta name="description" content="d"><title>T</title><link rel="icon" href="/f.ico">
            <link rel="stylesheet" href="/s.css"><style>p{}</style><base href="/"></head><body></body></html>"#,
        );
        assert!(out.contains("charset") && out.contains("viewport") && out.contains("<title>T</title>"));
        assert!(out.contains("/s.css") && out.contains("<style>"));
        assert!(!out.contains("description") && !out.contains("f.ico") && !out.contains("<base"));
    }

    #[test]
    fn collapses_whitespace_but_not_in_pre() {
        let out = simplify("<body><div>\n\n   <p>a</p>\n\t <p>b</p></div><pre>  \n  </pre></body>");
        assert!(out.contains("<div> <p>a</p> <p>b</p></div>"), "{out}");
        assert!(out.contains("<pre>  \n  </pre>") || out.contains("<pre> \n  </pre>"), "{out}");
    }

    #[test]
    fn idempotent_after_adjacent_text_merge() {
        let first = simplify("<body><p>a <!--x--> <!--y--> b</p>  <!--z-->  <div>c</div></body>");
        assert_eq!(simplify(&first), first);
    }

    #[test]
    fn insert_links_rules() {
        let pool = vec!["https://x.com/1".to_string()];
        let plain = "<html><head></head><body><p>no links</p></body></html>";
        let doc = insert_links(HtmlDocument::parse(plain), &pool, 1).unwrap();
        assert_eq!(doc.to_html(), HtmlDocument::parse(plain).to_html());

        let src = r##"<body><a href="#">a</a><a href="/b" class="k">b</a><a name="anchor">c</a></body>"##;
        let doc = insert_links(HtmlDocument::parse(src), &pool, 9).unwrap();
        let hrefs: Vec<Option<String>> = doc.elements("a").map(|a| attr(&a, "href")).collect();
        assert_eq!(hrefs, vec![Some(pool[0].clone()), Some(pool[0].clone()), None]);
        assert!(insert_links(HtmlDocument::parse(src), &[], 1).is_err());
    }

    #[test]
    fn replace_images_unique_then_wraps() {
        let map: Vec<String> = (1..=3).map(|i| format!("/img/{i}.png")).collect();
        let three = r#"<body><img src="a.png"><div style="background-image: url('b.png')"></div><img src="c.png"></body>"#;
        let out = replace_images(HtmlDocument::parse(three), &map, 5).unwrap();
        let used: Vec<&String> = out.assignments.iter().map(|(_, n)| n).collect();
        assert_eq!(used, map.iter().collect::<Vec<_>>());
        assert!(out.warnings.is_empty());
        assert!(out.document.to_html().contains("url('/img/2.png')"));

        let five = r#"<body><img src="1"><img src="2"><img src="3"><img src="4"><img src="5"></body>"#;
        let out = replace_images(HtmlDocument::parse(five), &map, 5).unwrap();
        assert_eq!(out.assignments.len(), 5);
        assert_eq!(out.warnings.len(), 1);
        let firsts: Vec<&str> = out.assignments[..3].iter().map(|(_, n)| n.as_str()).collect();
        assert_eq!(firsts, ["/img/1.png", "/img/2.png", "/img/3.png"]);
        assert!(replace_images(HtmlDocument::parse(five), &[], 5).is_err());
    }

    #[test]
    fn background_rewrite_preserves_other_declarations() {
        let map = vec!["/n.png".to_string()];
        let src = r#"<div style="color: red; background: #fff url(x.png) no-repeat; margin:0"></div>"#;
        let out = replace_images(HtmlDocument::parse(src), &map, 0).unwrap();
        assert!(out.document.to_html().contains("color: red; background: #fff url(/n.png) no-repeat; margin:0"));
    }

    fn element(tag: &str, bbox: BoundingBox, visible: bool) -> DumpElement {
        DumpElement {
            tag: tag.into(),
            bbox,
            visible,
            href: None,
            src: None,
            background_image: None,
            text: None,
        }
    }

    #[test]
    fn extracts_single_anchor() {
        let mut a = element("a", BoundingBox::new(10.0, 10.0, 60.0, 30.0), true);
        a.href = Some("/about".into());
        a.text = Some("  About us ".into());
        let dump = GeometryDump {
            origin: "https://a.com".into(),
            viewport: Viewport {
                width: 800.0,
                height: 600.0,
            },
            elements: vec![a],
        };
        let list = extract_resources(&dump, &["/api"]).unwrap();
        assert_eq!(list.entries.len(), 1);
        assert_eq!(list.entries[0].kind, ResourceKind::InternalLink);
        assert_eq!(list.entries[0].url, "https://a.com/about");
        assert_eq!(list.entries[0].text.as_deref(), Some("About us"));
        assert_eq!((list.width, list.height), (800.0, 600.0));
    }

    #[test]
    fn skips_invisible_and_reports_bad_boxes() {
        let mut img = element("img", BoundingBox::new(0.0, 0.0, 10.0, 10.0), false);
        img.src = Some("/x.png".into());
        let mut dump = GeometryDump {
            origin: "https://a.com".into(),
            viewport: Viewport {
                width: 100.0,
                height: 100.0,
            },
            elements: vec![img],
        };
        assert!(extract_resources(&dump, &["/api"]).unwrap().entries.is_empty());
        dump.elements.push(element("div", BoundingBox::new(5.0, 0.0, 1.0, 1.0), true));
        let err = extract_resources(&dump, &["/api"]).unwrap_err();
        assert!(matches!(err, Error::InvalidDump { index: 1, .. }), "{err}");
    }

    #[test]
    fn dump_json_shape() {
        let text = r#"{"origin":"https://a.com","viewport":{"width":10,"height":10},
            "elements":[{"tag":"div","box":[[0,0],[5,5]],"visible":true,"backgroundImage":"/bg.png"}]}"#;
        let dump = GeometryDump::from_json(text).unwrap();
        assert_eq!(dump.elements[0].background_image.as_deref(), Some("/bg.png"));
        let list = extract_resources(&dump, &["/api"]).unwrap();
        assert_eq!(list.entries[0].kind, ResourceKind::BackgroundImage);
    }
}
