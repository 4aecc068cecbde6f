#!/usr/bin/env python3
"""Writes the bundled 20-document bilingual test corpus.

Documents are synthetic: sentences are drawn from templates filled with
random names, places, dates and numbers, so every document is reproducible
from the seed and contains plenty of distinct facts for the offline QA
simulator to ask about.
"""

import argparse
import json
import pathlib
import random

MONTHS = ["January", "February", "March", "April", "May", "June", "July", "August", "September", "October",
          "November", "December"]
SURNAMES = ["Abernathy", "Blackwood", "Carrington", "Delacroix", "Ellsworth", "Fairbanks", "Gallagher",
            "Hargreaves", "Islington", "Jennings", "Kensington", "Lockhart", "Merriweather", "Northcott",
            "Oakridge", "Pemberton", "Quillfeather", "Rutherford", "Sutherland", "Thornbury", "Underhill",
            "Vandermeer", "Whitcombe", "Yardley", "Ashcombe", "Brightwater", "Colquhoun", "Dunmore",
            "Everhart", "Fenwick", "Greystone", "Holloway", "Ingleby", "Jardine", "Kilbride", "Langford"]
PLACES = ["Ashford", "Bramley", "Coldwater", "Dunhaven", "Eastmere", "Foxhollow", "Glenrock", "Highbury",
          "Ironbridge", "Juniper", "Kingsreach", "Larkfield", "Millbrook", "Northwick", "Oldcastle", "Pinehurst",
          "Queensport", "Redmarsh", "Stonebridge", "Thornfield", "Upton", "Valewood", "Westerly", "Yarrowby"]
COMPANIES = ["Amberline", "Brookfield", "Castlegate", "Driftwood", "Emberton", "Fieldstone", "Goldcrest",
             "Harbourview", "Ironclad", "Jetstream", "Keystone", "Lanternway", "Meridian", "Northstar"]
ACTS = ["Tenancy", "Harbour Dues", "Common Lands", "Mill Safety", "River Navigation", "Turnpike", "Poor Relief",
        "Weights and Measures", "Fisheries", "Public Health"]
SHIPS = ["Albatross", "Bellwether", "Cormorant", "Dauntless", "Endeavour", "Firebrand", "Gannet", "Halcyon",
         "Intrepid", "Kestrel", "Lodestar", "Marigold"]
OBJECTS = ["letter", "ring", "painting", "sword", "machine"]

EN_LAW = [
    "On {month} {day}, {year}, the {place} County Court ruled that Mr. {surname} owed {amount} dollars to the "
    "{company} Company.",
    "Section {n} of the {act} Act requires every tenant in {place} County to file notice within {k} days.",
    "Judge {surname} adjourned the hearing until {month} {day} after counsel for {company} Corporation asked "
    "for {k} more days.",
    "The {company} Bank lent {amount} dollars to the {place} Council in {year} at an interest rate of {pct} "
    "percent.",
    "At the trial in {year}, {k} witnesses testified that the {object} had been kept at {place} Street.",
    "The appeal filed by Mrs. {surname} in {year} was heard by a panel of {k} judges at the {place} Court.",
    "Under clause {n}, the lessee of the {place} mill must pay {amount} dollars each quarter to the "
    "{company} Company.",
    "The committee of {place} County recorded {k} complaints against the {company} Corporation in {year}.",
]
EN_BOOKS = [
    "In {year}, Captain {surname} sailed the ship {ship} from {place} to {place2} with {k} passengers aboard.",
    "Mrs. {surname} kept the {object} from her brother in a drawer for {k} years before showing it to anyone.",
    "The battle near {place} River in {year} left {k} soldiers of General {surname} without shelter.",
    "Dr. {surname} arrived at {place} on {month} {day}, {year}, carrying a {object} wrapped in oilcloth.",
    "The {company} University awarded young {surname} a prize of {amount} crowns in {year}.",
    "By the winter of {year}, the village of {place} had only {k} houses left standing after the war.",
    "General {surname} signed the treaty at {place} Castle on {month} {day}, {year}, in front of {k} officers.",
    "Mr. {surname} sold the painting to the {company} Gallery for {amount} crowns in {year}.",
]
EN_FILLER = [
    "Nobody in the household spoke of the matter again that season.",
    "The weather turned cold, and the roads became difficult to travel.",
    "Several neighbours later disputed the account, though none could offer proof.",
    "The clerk copied the entry twice, as was the custom in those days.",
    "It was a long and uneventful afternoon, remembered mostly for its silence.",
    "Such arrangements were common at the time and rarely questioned.",
    "The records from that period are incomplete, but the outline is clear.",
    "Those who were present described the mood as tense but orderly.",
]

ZH_SURNAMES = ["王", "李", "张", "刘", "陈", "杨", "赵", "黄", "周", "吴", "徐", "孙", "胡", "朱", "高", "林",
               "何", "郭", "马", "罗", "梁", "宋", "郑", "谢", "韩", "唐", "冯", "于", "董", "萧"]
ZH_GIVEN = ["文远", "子明", "德昌", "秀英", "立新", "国华", "春生", "玉兰", "志强", "明哲", "振华", "慧敏",
            "建平", "丽娟", "海涛", "思远"]
ZH_PLACES = ["江宁", "临川", "安平", "清河", "东陵", "南浦", "西湖", "北岭", "青州", "云阳", "长乐", "永和",
             "桐城", "松江", "柳溪", "石门"]
ZH_COMPANIES = ["永丰", "华茂", "瑞祥", "同德", "宏远", "恒昌", "广源", "福星", "大成", "新华", "锦绣", "太和"]
ZH_RIVERS = ["清", "白", "汾", "洛", "淮", "湘", "漓", "赣"]

ZH_LAW = [
    "{year}年{month}月{day}日，{place}市法院判决{name}先生向{company}公司支付{amount}元赔偿金。",
    "根据第{n}条规定，{place}县的租户须在{k}日内向法院提交书面通知。",
    "{surname}法官于{year}年审理了此案，并判决{company}公司赔偿原告{amount}元。",
    "{company}银行在{year}年向{place}市政府贷款{amount}元，年利率为百分之{pct}。",
    "在{year}年的审判中，共有{k}名证人出庭作证，证明那台机器一直存放在{place}县。",
    "{name}女士于{year}年提出上诉，案件由{place}法院的{k}名法官共同审理。",
    "按照合同第{n}款，{place}纺织厂的承租人每季度须向{company}公司缴纳{amount}元。",
    "{place}县委员会在{year}年共收到针对{company}公司的投诉{k}件。",
]
ZH_BOOKS = [
    "{year}年，{surname}将军率领{k}名士兵渡过了{river}河，在{place}城外扎营。",
    "{name}女士把那封信保存了{k}年，直到{year}年才当众拆开。",
    "{year}年{month}月，{name}先生乘船从{place}出发，经过{k}天抵达{place2}。",
    "{place}大学在{year}年授予年轻的{name}一笔{amount}元的奖金。",
    "到{year}年冬天，{place}村只剩下{k}座房屋还立着。",
    "{name}先生在{year}年以{amount}元的价格把那幅画卖给了{company}画廊。",
    "{year}年{month}月{day}日，{surname}将军在{place}城签署了和约，在场的军官有{k}人。",
    "那把剑在{name}家中传了{k}代，最后于{year}年捐给了{place}博物馆。",
]
ZH_FILLER = [
    "此后那一季，家里再也没有人提起这件事。",
    "天气渐渐转冷，道路也越来越难走了。",
    "几位邻居后来对这一说法提出了异议，但谁也拿不出证据。",
    "书记员按照当时的惯例把这条记录抄写了两遍。",
    "那是一个漫长而平静的下午，人们记得的只有寂静。",
    "这样的安排在当时十分普遍，很少有人质疑。",
    "那一时期的档案并不完整，但大致的经过是清楚的。",
    "在场的人都说，气氛虽然紧张，却井然有序。",
]


def fill(template, rng, zh):
    values = {
        "month": rng.randint(1, 12) if zh else rng.choice(MONTHS),
        "day": rng.randint(1, 28),
        "year": rng.randint(1701, 1998),
        "amount": rng.randint(120, 98000),
        "k": rng.randint(2, 99),
        "n": rng.randint(10, 480),
        "pct": rng.randint(2, 19),
    }
    if zh:
        surname = rng.choice(ZH_SURNAMES)
        values.update(surname=surname, name=surname + rng.choice(ZH_GIVEN), place=rng.choice(ZH_PLACES),
                      place2=rng.choice(ZH_PLACES), company=rng.choice(ZH_COMPANIES), river=rng.choice(ZH_RIVERS))
    else:
        values.update(surname=rng.choice(SURNAMES), place=rng.choice(PLACES), place2=rng.choice(PLACES),
                      company=rng.choice(COMPANIES), act=rng.choice(ACTS), ship=rng.choice(SHIPS),
                      object=rng.choice(OBJECTS))
    return template.format(**values)


def tokens(text, zh):
    return len(text.replace(" ", "")) if zh else len(text.split())


def document(rng, zh, domain, target):
    facts = (ZH_LAW if domain == "law" else ZH_BOOKS) if zh else (EN_LAW if domain == "law" else EN_BOOKS)
    filler = ZH_FILLER if zh else EN_FILLER
    seen = set()
    paragraphs = []
    total = 0
    while total < target:
        sentences = []
        for _ in range(rng.randint(4, 8)):
            if rng.random() < 0.3:
                s = rng.choice(filler)
            else:
                s = fill(rng.choice(facts), rng, zh)
                if s in seen:
                    continue
                seen.add(s)
            sentences.append(s)
        para = ("" if zh else " ").join(sentences)
        paragraphs.append(para)
        total += tokens(para, zh)
    return "\n\n".join(paragraphs) + "\n"


# (id, language, domain, approximate token count)
LAYOUT = [
    ("en_books_01", "en", "books", 2600),
    ("en_books_02", "en", "books", 4200),
    ("en_books_03", "en", "books", 7000),
    ("en_books_04", "en", "books", 11000),
    ("en_books_05", "en", "books", 17500),
    ("en_law_01", "en", "law", 2400),
    ("en_law_02", "en", "law", 3800),
    ("en_law_03", "en", "law", 6000),
    ("en_law_04", "en", "law", 9000),
    ("en_law_05", "en", "law", 13500),
    ("zh_books_01", "zh", "books", 2500),
    ("zh_books_02", "zh", "books", 4000),
    ("zh_books_03", "zh", "books", 6500),
    ("zh_books_04", "zh", "books", 9500),
    ("zh_books_05", "zh", "books", 40000),
    ("zh_law_01", "zh", "law", 2200),
    ("zh_law_02", "zh", "law", 3600),
    ("zh_law_03", "zh", "law", 5500),
    ("zh_law_04", "zh", "law", 8000),
    ("zh_law_05", "zh", "law", 80000),
]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("out", type=pathlib.Path)
    parser.add_argument("--seed", type=int, default=20240611)
    args = parser.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    for i, (doc_id, lang, domain, target) in enumerate(LAYOUT):
        rng = random.Random(args.seed * 1000 + i)
        text = document(rng, lang == "zh", domain, target)
        (args.out / f"{doc_id}.txt").write_text(text, encoding="utf-8")
        meta = {"language": lang, "domain": domain}
        (args.out / f"{doc_id}.meta.json").write_text(json.dumps(meta) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
