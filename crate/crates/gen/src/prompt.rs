use std::fmt;
use std::str::FromStr;

use base64::Engine;
use mrweb_core::resource::ResourceList;
use serde::{Deserialize, Serialize};

use crate::chat::{ChatMessage, ContentPart};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PromptStrategy {
    SelfContained,
    ZeroShot,
    ChainOfThought,
    SelfRefine,
}

impl PromptStrategy {
    pub const ALL: [PromptStrategy; 4] = [
        PromptStrategy::SelfContained,
        PromptStrategy::ZeroShot,
        PromptStrategy::ChainOfThought,
        PromptStrategy::SelfRefine,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            PromptStrategy::SelfContained => "self-contained",
            PromptStrategy::ZeroShot => "zero-shot",
            PromptStrategy::ChainOfThought => "chain-of-thought",
            PromptStrategy::SelfRefine => "self-refine",
        }
    }

    pub fn uses_resources(&self) -> bool {
        *self != PromptStrategy::SelfContained
    }
}

impl fmt::Display for PromptStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PromptStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::UnknownStrategy(s.to_string()))
    }
}

pub const ACTION_LIST: &str = "[ACTION LIST]";
pub const CODE: &str = "[CODE]";

const SELF_CONTAINED: &str = "Here is a screenshot of a web page. Please write an HTML and Tailwind CSS to make it look exactly like the original web page. Pay attention to things like size, text, position, and color of all the elements, as well as the overall layout. Respond with the content of the HTML+tail-wind CSS code.";

const FORMAT: &str = "The format of the action list is as follows:
    {
    \"position\": bounding box of format [[x1, y1], [x2, y2]], specifying the top left corner and the bottom right corner of the element;
    \"type\": element type;
    \"url\": url of the element;
    }";

const ZERO_SHOT_HEAD: &str = "Here is a screenshot of a web page and its \"action list\" which specifies the links and images in the webpage. Please write an HTML and Tailwind CSS to make it look exactly like the original web page. Pay attention to things like size, text, position, and color of all the elements, as well as the overall layout. ";

const COT_HEAD: &str = "Here is a screenshot of a web page and its \"action list\" which specifies the links and images in the webpage. Please write a HTML and Tailwind CSS to make it look exactly like the original web page. Please think step by step, and pay attention to things like size, text, position, and color of all the elements, as well as the overall layout.  ";

const REFINE_HEAD: &str = "Here is a screenshot of a web page and its \"action list\" which specifies the links and images in the webpage. I have an HTML file for implementing a webpage but it has some missing or wrong elements that are different from the original webpage. Please compare the two webpages and revise the original HTML implementation. Return a single piece of HTML and tail-wind CSS code to reproduce exactly the website. Pay attention to things like size, text, position, and color of all the elements, as well as the overall layout. Respond with the content of the HTML+tail-wind CSS code.  ";

/// The template for `strategy` with its placeholders still in place.
pub fn template(strategy: PromptStrategy) -> String {
    match strategy {
        PromptStrategy::SelfContained => SELF_CONTAINED.to_string(),
        PromptStrategy::ZeroShot => format!("{ZERO_SHOT_HEAD}{FORMAT}\nThe action list is as follows: \n{ACTION_LIST}"),
        PromptStrategy::ChainOfThought => format!("{COT_HEAD}{FORMAT}\nThe action list is as follows:\n{ACTION_LIST}"),
        PromptStrategy::SelfRefine => {
            format!("{REFINE_HEAD}{FORMAT}\nThe current implementation I have is: {CODE} The action list is as follows: {ACTION_LIST}")
        }
    }
}

/// Fills the template for `strategy`. The resource list is required for
/// every strategy except self-contained; prior code only for self-refine.
pub fn build_prompt_text(strategy: PromptStrategy, resources: Option<&ResourceList>, prior_code: Option<&str>) -> Result<String> {
    if !strategy.uses_resources() && resources.is_some() {
        return Err(Error::UnexpectedInput("self-contained prompts take no resource list".into()));
    }
    if strategy != PromptStrategy::SelfRefine && prior_code.is_some() {
        return Err(Error::UnexpectedInput(format!("{strategy} prompts take no prior code")));
    }
    let mut text = template(strategy);
    // Code first, so a literal "[ACTION LIST]" inside it is never substituted.
    let list_at = text.find(ACTION_LIST);
    if let Some(code_at) = text.find(CODE) {
        let code = prior_code.ok_or(Error::MissingPlaceholder(CODE))?;
        let resources = resources.ok_or(Error::MissingPlaceholder(ACTION_LIST))?;
        let list_at = list_at.expect("refine template has an action list");
        let list = resources.entries_json();
        text = format!(
            "{}{}{}{}{}",
            &text[..code_at],
            code,
            &text[code_at + CODE.len()..list_at],
            list,
            &text[list_at + ACTION_LIST.len()..]
        );
    } else if let Some(list_at) = list_at {
        let resources = resources.ok_or(Error::MissingPlaceholder(ACTION_LIST))?;
        text.replace_range(list_at..list_at + ACTION_LIST.len(), &resources.entries_json());
    }
    Ok(text)
}

pub fn png_data_url(png: &[u8]) -> String {
    format!("data:image/png;base64,{}", base64::engine::general_purpose::STANDARD.encode(png))
}

/// A user message pairing the filled template with the given screenshots.
pub fn build_prompt(
    strategy: PromptStrategy,
    resources: Option<&ResourceList>,
    prior_code: Option<&str>,
    screenshots: &[&[u8]],
) -> Result<ChatMessage> {
    let text = build_prompt_text(strategy, resources, prior_code)?;
    let mut content = vec![ContentPart::Text { text }];
    content.extend(screenshots.iter().map(|png| ContentPart::image(png_data_url(png))));
    Ok(ChatMessage::user(content))
}
