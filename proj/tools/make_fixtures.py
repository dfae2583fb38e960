# Copyright 2026 The trustscreen Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Regenerates the bundled fixtures under data/. Output is deterministic."""

import datetime as dt
import json
import math
import pathlib
import random

ROOT = pathlib.Path(__file__).resolve().parent.parent / "data"

HASHTAG_POOL = ["earnings", "stocks", "stockmarket", "priceaction", "risks", "marketalert",
                "makingmoney", "investing", "business", "tech", "nasdaq", "trading"]
ANNOTATION_POOL = ["Microsoft", "U.S.", "Google", "Amazon", "Refinitiv", "Facebook",
                   "Jack Dorsey", "Wall Street", "Nasdaq", "India"]
REASONS = [
    "revenue guidance for the second quarter came in below estimates",
    "monetizable daily active users grew slower than analysts expected",
    "the company warned that ad revenue growth will slow later this year",
    "user growth missed the consensus forecast",
    "management expects expenses to rise sharply this year",
    "the outlook for the next quarter disappointed investors",
    "analysts cut their price targets after the earnings call",
    "ad pricing weakened compared with last year",
]
FIRMS = ["Goldman", "Morgan Stanley", "JPMorgan", "Citi", "Wedbush", "Evercore", "MKM Partners"]


def iso(t):
    return t.strftime("%Y-%m-%dT%H:%M:%SZ")


def sigil_text(tags, sigil):
    return " ".join(sigil + t for t in tags)


class TweetFactory:
    def __init__(self, rng):
        self.rng = rng
        self.next_id = 1387900000000000000

    def make(self, text, *, created, engagement, author_age_days, followers, statuses,
             verified=False, lang="en", retweet=False, cashtags=(), hashtags=(), mentions=(),
             annotations=(), label=None, urls=()):
        self.next_id += self.rng.randint(1000, 90000)
        created_author = created - dt.timedelta(days=author_age_days)
        rec = {
            "id": str(self.next_id),
            "text": text,
            "created_at": iso(created),
            "lang": lang,
            "is_retweet": retweet,
            "verified": verified,
            "metrics": dict(zip(["retweet_count", "reply_count", "like_count", "quote_count"], engagement)),
            "author": {
                "followers_count": followers,
                "following_count": self.rng.randint(5, 2000),
                "tweet_count": statuses,
                "listed_count": self.rng.randint(0, 50),
                "created_at": iso(created_author),
            },
            "entities": {
                "hashtags": list(hashtags),
                "cashtags": list(cashtags),
                "mentions": list(mentions),
                "urls": list(urls),
                "annotations": list(annotations),
            },
        }
        if label is not None:
            rec["label"] = label
        return rec


def random_time(rng, start, end):
    span = int((end - start).total_seconds())
    return start + dt.timedelta(seconds=rng.randrange(span))


def engaged(rng, scale=20):
    e = [rng.randint(0, scale) for _ in range(4)]
    if sum(e) == 0:
        e[2] = 1
    return e


# ---------------------------------------------------------------------------
# TWTR labelled collection


def top_tweets(f, rng):
    """Ten high-engagement verified news tweets that dominate the first PRF round."""
    base = dt.datetime(2021, 4, 29, 20, 30, tzinfo=dt.timezone.utc)
    rows = [
        ("Twitter stock price slides after revenue guidance misses estimates $TWTR #risks",
         ["TWTR"], ["risks"], ["Microsoft", "U.S."]),
        ("$TWTR stock drops as user growth slows; $FB reports after the bell #priceaction",
         ["TWTR", "FB"], ["priceaction"], ["Google", "Facebook"]),
        ("Twitter shares tumble in late trading, stock price down 11% #stockmarket $twtr",
         ["twtr"], ["stockmarket"], ["Amazon", "U.S."]),
        ("Twitter stock falls because second quarter revenue outlook disappoints $TWTR #marketalert",
         ["TWTR"], ["marketalert"], ["Refinitiv", "Microsoft"]),
        ("Why Twitter stock price is sinking after earnings $TWTR #makingmoney",
         ["TWTR"], ["makingmoney"], ["Google", "Amazon"]),
        ("Twitter stock lower after the company guided below consensus $TWTR $FB #risks",
         ["TWTR", "FB"], ["risks"], ["Microsoft", "Refinitiv"]),
        ("Twitter price target cut at two brokers after weak guidance $TWTR #priceaction",
         ["TWTR"], ["priceaction"], ["U.S.", "Google"]),
        ("Twitter stock: monetizable users miss since ad growth slowed $twtr #stockmarket",
         ["twtr"], ["stockmarket"], ["Amazon", "Microsoft"]),
        ("Twitter stock price reaction: analysts see slower growth ahead $TWTR #marketalert",
         ["TWTR"], ["marketalert"], ["Refinitiv", "U.S."]),
        ("Twitter stock sinks as expenses are set to rise $TWTR #makingmoney",
         ["TWTR"], ["makingmoney"], ["Google", "Microsoft"]),
    ]
    out = []
    for i, (text, cash, tags, ann) in enumerate(rows):
        out.append(f.make(
            text, created=base + dt.timedelta(minutes=7 * i),
            engagement=[rng.randint(300, 900), rng.randint(50, 200), rng.randint(1500, 5000), rng.randint(20, 90)],
            author_age_days=rng.randint(2000, 4000), followers=rng.randint(200000, 4000000),
            statuses=rng.randint(20000, 300000), verified=True, cashtags=cash, hashtags=tags,
            annotations=["Twitter"] + ann, label="reliable"))
    return out


def reliable_text(rng):
    pct = rng.choice([9, 10, 11, 12, 13, 14, 15])
    reason = rng.choice(REASONS)
    firm = rng.choice(FIRMS)
    forms = [
        f"Twitter stock fell {pct}% because {reason}",
        f"Twitter stock dropped {pct}% on Friday after {reason}",
        f"{firm} lowers its Twitter price target since {reason}",
        f"Twitter stock price is down {pct}% premarket due to weaker guidance, as {reason}",
        f"Twitter reported first quarter revenue of $1.04 billion and the stock slid because {reason}",
        f"The stock should stay under pressure because {reason}",
        f"Twitter stock is lower today after {reason}",
        f"Investors sold Twitter stock as {reason}",
        f"Twitter price action: the stock gapped down {pct}% since {reason}",
        f"{firm} says Twitter stock will lag peers because {reason}",
    ]
    return rng.choice(forms)


def make_twtr_collection(rng):
    f = TweetFactory(rng)
    start = dt.datetime(2021, 4, 27, tzinfo=dt.timezone.utc)
    end = dt.datetime(2021, 5, 1, tzinfo=dt.timezone.utc)
    tweets = top_tweets(f, rng)

    def cash_for():
        return rng.choice([["TWTR"], ["TWTR"], ["TWTR"], ["twtr"], ["TWTR", "FB"]])

    def ann_for():
        return ["Twitter"] + rng.sample(ANNOTATION_POOL, rng.randint(0, 2))

    # reliable: 198 more (30 with zero engagement)
    for i in range(198):
        cash = cash_for()
        tags = rng.sample(HASHTAG_POOL[:8], rng.randint(0, 2))
        text = reliable_text(rng) + " " + sigil_text(cash, "$") + (" " + sigil_text(tags, "#") if tags else "")
        eng = [0, 0, 0, 0] if i < 30 else engaged(rng, 40)
        tweets.append(f.make(
            text, created=random_time(rng, start, end), engagement=eng,
            author_age_days=rng.randint(200, 4000), followers=rng.randint(50, 90000),
            statuses=rng.randint(300, 90000), verified=rng.random() < 0.15,
            cashtags=cash, hashtags=tags, annotations=ann_for(), label="reliable"))

    # unreliable
    spam_lines = [
        "$TWTR to the moon, buy the stock now before it is too late",
        "Twitter stock price today, click for free signals",
        "TWTR stock going to 100 for sure, trust me",
        "buy $TWTR stock price is a steal right now",
        "best stock alerts for Twitter and more, join now",
        "Twitter stock is the best, I love it so much",
        "TWTR stock price update, follow for more",
        "who is buying Twitter stock on this dip?",
        "Twitter stock is awesome and amazing, wonderful company",
        "get rich with TWTR stock, easy money every day",
    ]
    for i in range(300):
        cash = cash_for()
        base_text = rng.choice(spam_lines)
        tags = rng.sample(HASHTAG_POOL, rng.randint(0, 2))
        text = base_text + " " + sigil_text(cash, "$") + (" " + sigil_text(tags, "#") if tags else "")
        tweets.append(f.make(
            text, created=random_time(rng, start, end), engagement=[0, 0, 0, 0],
            author_age_days=rng.randint(5, 3000), followers=rng.randint(0, 3000),
            statuses=rng.randint(0, 20000), cashtags=cash, hashtags=tags, annotations=ann_for(),
            label="unreliable"))
    for i in range(45):
        tags = rng.sample(HASHTAG_POOL + ["forex", "crypto", "bitcoin", "daytrading", "wallstreet", "money"], 8)
        text = "TWTR stock $TWTR " + sigil_text(tags, "#")
        tweets.append(f.make(
            text, created=random_time(rng, start, end), engagement=engaged(rng, 5),
            author_age_days=rng.randint(60, 3000), followers=rng.randint(10, 3000),
            statuses=rng.randint(100, 20000), cashtags=["TWTR"], hashtags=tags, annotations=["Twitter"],
            label="unreliable"))
    prof_lines = [
        "Twitter stock is crap, damn this company",
        "what a damn disaster for Twitter stock holders, total crap",
        "wtf is this Twitter stock price, damn idiots",
        "Twitter stock sucks, crap earnings again, damn",
    ]
    for i in range(20):
        text = rng.choice(prof_lines) + " $TWTR"
        tweets.append(f.make(
            text, created=random_time(rng, start, end), engagement=engaged(rng, 8),
            author_age_days=rng.randint(60, 3000), followers=rng.randint(10, 3000),
            statuses=rng.randint(100, 20000), cashtags=["TWTR"], annotations=["Twitter"], label="unreliable"))
    pump_lines = [
        "Twitter stock will double next week, load up now $TWTR",
        "insiders say Twitter stock price will explode tomorrow $TWTR",
        "huge news coming for Twitter stock, buy before Monday $TWTR",
    ]
    for i in range(30):
        tweets.append(f.make(
            rng.choice(pump_lines), created=random_time(rng, start, end), engagement=engaged(rng, 6),
            author_age_days=rng.randint(1, 20), followers=rng.randint(0, 40), statuses=rng.randint(1, 60),
            cashtags=["TWTR"], annotations=["Twitter"], label="unreliable"))
    opinion_lines = [
        "I honestly think Twitter stock is a terrible and awful investment",
        "Twitter stock is so overrated, the worst stock in my portfolio",
        "I feel Twitter stock price is ridiculous and stupid",
        "personally I hate Twitter stock, such a bad and sad company",
        "Twitter stock is definitely the most beautiful chart ever",
        "my gut says Twitter stock is a huge, incredible opportunity",
        "Twitter stock price looks nice and strong, fantastic",
    ]
    for i in range(56):
        tweets.append(f.make(
            rng.choice(opinion_lines) + " $TWTR", created=random_time(rng, start, end),
            engagement=engaged(rng, 10), author_age_days=rng.randint(60, 3000),
            followers=rng.randint(20, 5000), statuses=rng.randint(100, 20000), cashtags=["TWTR"],
            annotations=["Twitter"], label="unreliable"))

    rng.shuffle(tweets)
    tweets.sort(key=lambda t: t["created_at"])
    return tweets


def make_distractors(rng, count=120):
    """Unlabelled corpus records that the initial query must not return."""
    f = TweetFactory(random.Random(rng.random()))
    start = dt.datetime(2021, 4, 27, tzinfo=dt.timezone.utc)
    end = dt.datetime(2021, 5, 1, tzinfo=dt.timezone.utc)
    out = []
    for i in range(count):
        kind = i % 6
        created = random_time(rng, start, end)
        kw = dict(engagement=engaged(rng, 30), author_age_days=rng.randint(100, 3000),
                  followers=rng.randint(10, 5000), statuses=rng.randint(100, 5000))
        if kind == 0:
            out.append(f.make("Twitter stock retweeted analysis $TWTR", created=created, retweet=True,
                              cashtags=["TWTR"], annotations=["Twitter"], **kw))
        elif kind == 1:
            out.append(f.make("Twitter Aktie fällt stark nach Zahlen stock $TWTR", created=created, lang="de",
                              cashtags=["TWTR"], annotations=["Twitter"], **kw))
        elif kind == 2:
            out.append(f.make("Twitter stock price earlier this month $TWTR #earnings",
                              created=created - dt.timedelta(days=20), cashtags=["TWTR"], hashtags=["earnings"],
                              annotations=["Twitter"], **kw))
        elif kind == 3:
            out.append(f.make("Facebook stock price climbs ahead of earnings $FB #earnings", created=created,
                              cashtags=["FB"], hashtags=["earnings"], annotations=["Facebook"], **kw))
        elif kind == 4:
            out.append(f.make("I love using Twitter to follow football news", created=created,
                              annotations=["Twitter"], **kw))
        else:
            out.append(f.make("FBIO stock price jumps on trial data $FBIO", created=created, cashtags=["FBIO"],
                              **kw))
    return out


# ---------------------------------------------------------------------------
# Human tweet corpus for the synthetic-text detector

SUBJECTS = ["Twitter", "the stock", "TWTR", "this company", "the market", "my position", "the chart",
            "tech stocks", "the Nasdaq", "Facebook", "the social media sector", "ad revenue", "the CEO",
            "management", "the guidance", "Wall Street", "retail traders", "the options market",
            "the earnings report", "user growth", "the buyback", "short sellers", "institutions",
            "my cousin", "our group chat", "the premarket", "the ticker", "the float", "my broker",
            "the analysts", "volume", "the sector", "my watchlist", "the tape", "semis", "bonds"]
VERBS = ["looks", "feels", "seems", "turned", "stayed", "went", "closed", "opened", "traded", "held",
         "dropped", "bounced", "rallied", "slipped", "stalled", "recovered", "popped", "faded", "broke", "tested",
         "dumped", "crawled", "drifted", "squeezed", "wobbled", "chopped", "ripped", "sank", "climbed", "stumbled"]
ADVERBS = ["weirdly", "quietly", "hard", "again", "slowly", "basically", "kinda", "totally", "barely", "suddenly",
           "honestly", "literally", "somehow", "finally", "already"]
PLACES = ["into the close", "after lunch", "most of the day", "below the 50 day average", "above support",
          "on heavy volume", "on light volume", "near the lows", "at resistance", "through the gap",
          "to where it started", "for hours", "into the red", "into the green", "without conviction",
          "on the news", "before the bell", "after hours", "despite the beat", "off the open", "into friday",
          "past the vwap", "under the trendline", "since march", "all week"]
FEELINGS = ["not sure what to make of it", "holding for now", "might add more tomorrow", "sold half",
            "watching the open closely", "no idea where this goes", "patience i guess", "time will tell",
            "could be a trap", "feels like capitulation", "did not expect that", "classic sell the news",
            "nobody saw that coming", "taking a break from screens", "waiting for confirmation",
            "staying hedged", "lesson learned", "what a week", "my wife asked why i am sighing",
            "coffee number four", "bought the dip too early", "that chart is ugly", "need a vacation",
            "guess i am a bagholder now", "charts do not lie", "should have listened to my gut"]
NOUNS = ["dip", "gap", "wick", "candle", "support", "breakout", "fade", "squeeze", "bounce", "selloff",
         "reversal", "pullback", "rally", "trend", "range", "spread", "premium", "guidance", "miss", "beat"]
ADJECTIVES = ["ugly", "brutal", "clean", "sloppy", "strange", "boring", "wild", "nice", "painful", "textbook",
              "messy", "huge", "tiny", "fake", "real", "classic", "annoying", "solid"]
OPENERS = ["honestly", "ok so", "lol", "well", "yeah", "hmm", "fwiw", "not gonna lie", "today", "again",
           "so", "wow", "meh", "anyway", "update", "note to self", "quick thought", "imo", "ugh", "welp"]
NAMES = ["dave", "jen", "marco", "priya", "my dad", "the guy at work", "my roommate", "uncle ray", "sam", "ana"]


def price(rng):
    return f"{rng.uniform(40, 80):.2f}" if rng.random() < 0.6 else str(rng.randint(40, 80))


def typo(rng, word):
    """Human slips: a dropped, doubled or swapped letter."""
    if len(word) < 4 or not word.isalpha():
        return word
    i = rng.randrange(1, len(word) - 1)
    kind = rng.randrange(3)
    if kind == 0:
        return word[:i] + word[i + 1:]
    if kind == 1:
        return word[:i] + word[i] + word[i:]
    return word[:i - 1] + word[i] + word[i - 1] + word[i + 1:]


def human_clause(rng):
    form = rng.randrange(6)
    if form == 0:
        return f"{rng.choice(SUBJECTS)} {rng.choice(VERBS)} {rng.choice(PLACES)}"
    if form == 1:
        return f"{rng.choice(SUBJECTS)} {rng.choice(ADVERBS)} {rng.choice(VERBS)} {rng.choice(PLACES)}"
    if form == 2:
        return f"that {rng.choice(NOUNS)} was {rng.choice(ADJECTIVES)}"
    if form == 3:
        return f"{rng.choice(NAMES)} says {rng.choice(SUBJECTS)} {rng.choice(VERBS)} {rng.choice(PLACES)}"
    if form == 4:
        return f"{rng.choice(ADJECTIVES)} {rng.choice(NOUNS)} at {price(rng)}"
    return f"{rng.choice(['in', 'out', 'long', 'short', 'flat'])} since {price(rng)}"


def human_text(rng):
    parts = []
    if rng.random() < 0.5:
        parts.append(rng.choice(OPENERS))
    parts.append(human_clause(rng))
    if rng.random() < 0.5:
        parts.append(f"at {price(rng)}")
    if rng.random() < 0.6:
        parts.append(rng.choice(FEELINGS))
    if rng.random() < 0.5:
        parts.append(human_clause(rng))
    words = " ".join(parts).split()
    return " ".join(typo(rng, w) if rng.random() < 0.04 else w for w in words)


def make_human_corpus(rng, count=400):
    f = TweetFactory(rng)
    start = dt.datetime(2021, 4, 1, tzinfo=dt.timezone.utc)
    end = dt.datetime(2021, 5, 20, tzinfo=dt.timezone.utc)
    seen = set()
    out = []
    while len(out) < count:
        text = human_text(rng)
        if text in seen:
            continue
        seen.add(text)
        out.append(f.make(text, created=random_time(rng, start, end), engagement=engaged(rng, 10),
                          author_age_days=rng.randint(100, 3000), followers=rng.randint(20, 5000),
                          statuses=rng.randint(100, 20000), label="reliable"))
    return out


# ---------------------------------------------------------------------------
# Score sidecar stub for the labelled collection


def sidecar_stub(rng, tweets):
    reliable_ids = [t["id"] for t in tweets if t.get("label") == "reliable"]
    # 125 negative, 50 neutral, 33 positive among reliable records
    moods = ["neg"] * 125 + ["neu"] * 50 + ["pos"] * 33
    rng.shuffle(moods)
    mood = dict(zip(reliable_ids, moods))
    lines = [json.dumps({"header": {"discriminator": "stub", "sentiment": "stub", "subjectivity": "stub"}},
                        sort_keys=True)]
    for t in tweets:
        reliable = t.get("label") == "reliable"
        text = t["text"].lower()
        opinion = any(w in text for w in ["i honestly", "overrated", "i feel", "i hate", "beautiful", "gut says",
                                          "looks nice"])
        if reliable:
            real = rng.uniform(0.72, 0.99) if rng.random() < 0.9 else rng.uniform(0.45, 0.7)
            sw, ss = rng.uniform(0.05, 0.45), rng.uniform(0.05, 0.45)
        elif opinion:
            real = rng.uniform(0.5, 0.95)
            sw, ss = rng.uniform(0.55, 0.95), rng.uniform(0.3, 0.95)
        else:
            real = rng.uniform(0.05, 0.95)
            sw, ss = rng.uniform(0.05, 0.95), rng.uniform(0.05, 0.95)
        m = mood.get(t["id"]) or rng.choice(["neg", "neu", "pos"])
        hi = rng.uniform(0.5, 0.9)
        rest = 1.0 - hi
        split = rng.uniform(0.0, rest)
        probs = {"neg": 0.0, "neu": 0.0, "pos": 0.0}
        probs[m] = hi
        others = [k for k in probs if k != m]
        probs[others[0]] = split
        probs[others[1]] = rest - split
        probs = {k: round(v, 6) for k, v in probs.items()}
        probs[others[1]] = round(1.0 - probs[m] - probs[others[0]], 6)
        lines.append(json.dumps({"id": t["id"], "discriminator_real": round(real, 6),
                                 "subj_word": round(sw, 6), "subj_sentence": round(ss, 6),
                                 "sentiment": probs}, sort_keys=True))
    return lines


# ---------------------------------------------------------------------------
# Prices


def make_prices(rng):
    rows = ["timestamp,open,high,low,close,volume"]
    day = dt.date(2020, 5, 1)
    close = 33.0
    while day <= dt.date(2021, 6, 30):
        if day.weekday() < 5:
            prev = close
            if day == dt.date(2021, 4, 30):
                close = prev * 0.849
                volume = 105_000_000
            else:
                # mild mean reversion towards a slow upward trend
                target = 33.0 + 35.0 * min(1.0, (day - dt.date(2020, 5, 1)).days / 300.0)
                close = prev * math.exp(0.02 * rng.gauss(0, 1) + 0.02 * math.log(target / prev))
                volume = int(rng.uniform(10e6, 25e6))
            open_ = prev * (1 + rng.gauss(0, 0.004))
            high = max(open_, close) * (1 + abs(rng.gauss(0, 0.006)))
            low = min(open_, close) * (1 - abs(rng.gauss(0, 0.006)))
            rows.append(f"{day.isoformat()}T00:00:00Z,{open_:.2f},{high:.2f},{low:.2f},{close:.2f},{volume}")
        day += dt.timedelta(days=1)
    return rows


# ---------------------------------------------------------------------------
# Lexicons and tables

SUBJECTIVITY = {
    "entire": 1.0, "good": 0.6, "bad": 0.667, "great": 0.75, "terrible": 1.0, "awful": 1.0, "amazing": 0.9,
    "awesome": 1.0, "wonderful": 1.0, "beautiful": 1.0, "fantastic": 0.9, "incredible": 0.9, "nice": 1.0,
    "strong": 0.733, "weak": 0.375, "huge": 0.9, "ridiculous": 1.0, "stupid": 1.0, "overrated": 0.9,
    "worst": 1.0, "best": 0.3, "sad": 1.0, "happy": 1.0, "definitely": 0.5, "honestly": 0.9, "personally": 0.7,
    "lower": 0.0, "higher": 0.5, "second": 0.0, "first": 0.333, "quarterly": 0.0, "daily": 0.0,
    "slower": 0.0, "weaker": 0.0, "active": 0.6, "late": 0.6, "heavy": 0.5, "light": 0.4, "flat": 0.3,
    "sharp": 0.5, "new": 0.455, "free": 0.8, "easy": 0.833, "rich": 0.5, "sure": 0.889, "total": 0.75,
    "real": 0.3, "fair": 0.9, "cheap": 0.7, "expensive": 0.7, "risky": 0.6, "volatile": 0.8, "solid": 0.4,
    "disappointing": 0.7, "impressive": 1.0, "poor": 0.6, "excellent": 1.0, "horrible": 1.0,
}
PROFANITY = ["damn", "crap", "wtf", "idiots", "idiot", "sucks", "shit", "bullshit", "moron", "stupid"]
CONTRACTIONS = {
    "you're": "you are", "i'm": "i am", "can't": "cannot", "won't": "will not", "don't": "do not",
    "doesn't": "does not", "didn't": "did not", "isn't": "is not", "aren't": "are not", "it's": "it is",
    "that's": "that is", "there's": "there is", "what's": "what is", "let's": "let us", "i've": "i have",
    "we're": "we are", "they're": "they are", "i'll": "i will", "we'll": "we will", "shouldn't": "should not",
    "wouldn't": "would not", "couldn't": "could not", "haven't": "have not", "wasn't": "was not",
    "gonna": "going to", "wanna": "want to",
}
EMOJI = [
    (":-)", ":smiley-face:"), (":)", ":smiley-face:"), (":-(", ":sad-face:"), (":(", ":sad-face:"),
    (";-)", ":winking-face:"), (":D", ":grinning-face:"),
    ("U+1F600", ":grinning-face:"), ("U+1F680", ":rocket:"), ("U+1F4C9", ":chart-decreasing:"),
    ("U+1F4C8", ":chart-increasing:"), ("U+1F525", ":fire:"), ("U+1F4B0", ":money-bag:"),
    ("U+1F62D", ":loudly-crying-face:"), ("U+1F914", ":thinking-face:"),
]
SYMBOLS = [
    ("TWTR", "TWTR.K", ["Twitter", "Twitter Inc.", "TWTR"]),
    ("FB", "FB.O", ["Facebook", "Facebook Inc.", "FB"]),
    ("AAPL", "AAPL.O", ["Apple", "Apple Inc.", "AAPL"]),
    ("AMZN", "AMZN.O", ["Amazon", "Amazon.com Inc.", "AMZN"]),
    ("MSFT", "MSFT.O", ["Microsoft", "Microsoft Corp.", "MSFT"]),
    ("GOOGL", "GOOGL.O", ["Google", "Alphabet", "GOOGL"]),
    ("TSLA", "TSLA.O", ["Tesla", "Tesla Inc.", "TSLA"]),
]


def frequencies(tweets):
    counts = {}
    for t in tweets:
        for tok in t["text"].lower().split():
            if tok[0] in "#$@" or tok.startswith("http"):
                continue
            w = "".join(ch for ch in tok if ch.isalpha())
            if w:
                counts[w] = counts.get(w, 0) + 1
    # segmentation vocabulary for common finance hashtags
    extra = {"technical": 400, "analysis": 500, "price": 900, "action": 300, "stock": 1200, "market": 800,
             "making": 250, "money": 600, "marketalert": 1, "alert": 200, "risks": 150, "investing": 300,
             "day": 500, "trading": 350, "wall": 200, "street": 220, "earnings": 400, "business": 300,
             "great": 700, "tech": 300, "investment": 250}
    for k, v in extra.items():
        counts[k] = counts.get(k, 0) + v
    counts.pop("marketalert", None)
    return counts


def write_lines(path, lines):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def main():
    rng = random.Random(20210430)
    collection = make_twtr_collection(rng)
    assert len(collection) == 659
    assert sum(t["label"] == "reliable" for t in collection) == 208
    write_lines(ROOT / "fixtures" / "twtr_labeled.jsonl",
                [json.dumps(t, ensure_ascii=False) for t in collection])
    corpus = collection + make_distractors(rng)
    corpus.sort(key=lambda t: (t["created_at"], t["id"]))
    write_lines(ROOT / "fixtures" / "twtr_corpus.jsonl", [json.dumps(t, ensure_ascii=False) for t in corpus])
    write_lines(ROOT / "fixtures" / "twtr_sidecar.jsonl", sidecar_stub(rng, collection))

    # separate stream so the human corpus can evolve without moving the other fixtures
    human = make_human_corpus(random.Random(400))
    write_lines(ROOT / "fixtures" / "human_tweets.jsonl", [json.dumps(t) for t in human])

    write_lines(ROOT / "prices" / "TWTR.csv", make_prices(rng))

    write_lines(ROOT / "lexicons" / "subjectivity.tsv",
                ["# word<TAB>subjectivity in [0,1]"] + [f"{k}\t{v}" for k, v in sorted(SUBJECTIVITY.items())])
    write_lines(ROOT / "lexicons" / "profanity.txt", sorted(PROFANITY))
    freq = frequencies(collection + human)
    write_lines(ROOT / "lexicons" / "frequencies.tsv",
                [f"{k}\t{v}" for k, v in sorted(freq.items(), key=lambda kv: (-kv[1], kv[0]))])
    write_lines(ROOT / "lexicons" / "contractions.tsv", [f"{k}\t{v}" for k, v in sorted(CONTRACTIONS.items())])
    write_lines(ROOT / "lexicons" / "emoji.tsv", [f"{k}\t{v}" for k, v in EMOJI])
    write_lines(ROOT / "symbols.tsv", [f"{t}\t{r}\t{'|'.join(n)}" for t, r, n in SYMBOLS])


if __name__ == "__main__":
    main()
