"""Deterministic desk-scale fixtures: conversations plus passage collections.

Three sets ship with the package:

desk    15 conversations / 200 passages with anaphoric follow-up turns,
        sized for relational end-to-end checks with the rule backends.
oracle  10 two-turn conversations whose gold answers are exactly the spans
        the lexical reader extracts, so the gold-CG pipeline path scores
        perfectly on it.
salary  the two-turn salary conversation (UK then US) used by the engine
        demos and the web UI script.

Everything is literal data; the builders only assemble it, so the files are
reproducible byte for byte.
"""

from __future__ import annotations

from pathlib import Path

from .core import Conversation, DocumentContext, Passage, Turn
from .dataset import save_dataset, save_doc_source
from .goldcg import build_gold_cg
from .retrieval import save_passages

_PADS = (
    "Visitors ask about this detail all the time and local guides repeat it with patience every single day.",
    "The fact comes up in school lessons quite often and children remember it long after the class ends.",
    "Reference pages mention this answer near the top and readers quote it almost every single week.",
)

# per conversation: id, doc (or None), then two turns:
#   (question, rewrite, answer, gold passage text)
# The first turn is self-contained (rewrite None means rewrite == question).
_DESK_CONVERSATIONS = [
    {
        "id": "messi",
        "doc": ("Lionel Messi", "Lionel Messi is a footballer who was born in 1987."),
        "turns": [
            (
                "How old is Lionel Messi?",
                None,
                "36 years old",
                "Lionel Messi is 36 years old. {pad}",
            ),
            (
                "Which position does he play?",
                "Which position does Lionel Messi play?",
                "a forward",
                "Lionel Messi plays as a forward. The forward role suits a veteran of 36 years.",
            ),
        ],
    },
    {
        "id": "frida-kahlo",
        "doc": ("Frida Kahlo", "Frida Kahlo is a painter who worked at her own home."),
        "turns": [
            (
                "Where was Frida Kahlo born?",
                None,
                "a small village",
                "Frida Kahlo was born in a small village. {pad}",
            ),
            (
                "Which museum shows her work?",
                "Which museum shows the work of Frida Kahlo?",
                "a blue house",
                "Frida Kahlo painted inside a blue house. The blue house sits near a small village.",
            ),
        ],
    },
    {
        "id": "marie-curie",
        "doc": ("Marie Curie", "Marie Curie is a scientist who studied in two countries."),
        "turns": [
            (
                "What did Marie Curie study?",
                None,
                "the new elements",
                "Marie Curie chose to study the new elements. {pad}",
            ),
            (
                "Which prize did she receive?",
                "Which prize did Marie Curie receive?",
                "the physics medal",
                "Marie Curie received the physics medal. The medal honored the new elements.",
            ),
        ],
    },
    {
        "id": "eiffel-tower",
        "doc": ("Eiffel Tower", "The Eiffel Tower is a landmark made of iron."),
        "turns": [
            (
                "How tall is the Eiffel Tower?",
                None,
                "330 meters tall",
                "The Eiffel Tower is 330 meters tall. {pad}",
            ),
            (
                "Who designed it?",
                "Who designed the Eiffel Tower?",
                "Gustave Eiffel",
                "Gustave Eiffel designed the famous tower. The tower rises 330 meters above the city.",
            ),
        ],
    },
    {
        "id": "nile-river",
        "doc": None,
        "turns": [
            (
                "How long is the river Nile?",
                None,
                "6,650 kilometers long",
                "The river Nile is 6,650 kilometers long. {pad}",
            ),
            (
                "Which sea does it reach?",
                "Which sea does the river Nile reach?",
                "the Mediterranean",
                "The river Nile reaches the Mediterranean. The waters run 6,650 kilometers.",
            ),
        ],
    },
    {
        "id": "mona-lisa",
        "doc": ("Mona Lisa", "The Mona Lisa is a portrait of a merchant wife."),
        "turns": [
            (
                "Where is the Mona Lisa kept?",
                None,
                "a glass case",
                "The Mona Lisa is kept inside a glass case. {pad}",
            ),
            (
                "Which city keeps it?",
                "Which city keeps the Mona Lisa?",
                "the French capital",
                "The Mona Lisa stays in the French capital. A glass case guards the painting.",
            ),
        ],
    },
    {
        "id": "great-wall",
        "doc": ("Great Wall", "The Great Wall is a fortification of stone and earth."),
        "turns": [
            (
                "How long is the Great Wall?",
                None,
                "13,000 miles long",
                "The Great Wall is 13,000 miles long. {pad}",
            ),
            (
                "Which dynasty built it?",
                "Which dynasty built the Great Wall?",
                "the Ming rulers",
                "The Ming rulers built the Great Wall. The wall stretches 13,000 miles.",
            ),
        ],
    },
    {
        "id": "sahara-desert",
        "doc": ("Sahara", "The Sahara desert is a dry region of sand and rock."),
        "turns": [
            (
                "How large is the Sahara desert?",
                None,
                "nine million square kilometres",
                "The large Sahara desert spans nine million square kilometres. {pad}",
            ),
            (
                "Which animals cross it?",
                "Which animals cross the Sahara desert?",
                "the desert camels",
                "The desert camels cross the Sahara slowly. Caravans span nine million square kilometres.",
            ),
        ],
    },
    {
        "id": "amazon-forest",
        "doc": ("Amazon", "The Amazon forest is a rainforest crossed by a wide river."),
        "turns": [
            (
                "How old is the Amazon forest?",
                None,
                "55 million years old",
                "The Amazon forest is 55 million years old. {pad}",
            ),
            (
                "Which birds live in it?",
                "Which birds live in the Amazon forest?",
                "the scarlet macaws",
                "The scarlet macaws live across the Amazon forest. The canopy grew over 55 million years.",
            ),
        ],
    },
    {
        "id": "pacific-ocean",
        "doc": ("Pacific", "The Pacific ocean is a body of water between many coasts."),
        "turns": [
            (
                "How deep is the Pacific ocean?",
                None,
                "eleven thousand metres deep",
                "The Pacific ocean is eleven thousand metres deep. {pad}",
            ),
            (
                "Which trench lies in it?",
                "Which trench lies in the Pacific ocean?",
                "the Mariana region",
                "The Mariana region lies beneath the Pacific ocean. Probes sank eleven thousand metres.",
            ),
        ],
    },
    {
        "id": "taj-mahal",
        "doc": ("Taj Mahal", "The Taj Mahal is a mausoleum beside a broad river."),
        "turns": [
            (
                "Why was the Taj Mahal built?",
                None,
                "a marble memorial",
                "The Taj Mahal was built as a marble memorial. {pad}",
            ),
            (
                "Which emperor ordered it?",
                "Which emperor ordered the Taj Mahal?",
                "the Mughal king",
                "The Mughal king ordered the Taj Mahal. Craftsmen raised a marble memorial.",
            ),
        ],
    },
    {
        "id": "halleys-comet",
        "doc": None,
        "turns": [
            (
                "How often does Halley's comet return to the sky?",
                None,
                "76 years",
                "Halley's comet returns to the sky every 76 years. {pad}",
            ),
            (
                "Which astronomer named it?",
                "Which astronomer named Halley's comet?",
                "an English stargazer",
                "An English stargazer named Halley's comet. Sightings repeat every 76 years.",
            ),
        ],
    },
    {
        "id": "venus-flytrap",
        "doc": None,
        "turns": [
            (
                "What does the Venus flytrap eat?",
                None,
                "small crawling insects",
                "The Venus flytrap will eat small crawling insects. {pad}",
            ),
            (
                "Which swamps grow it?",
                "Which swamps grow the Venus flytrap?",
                "the coastal bogs",
                "The coastal bogs grow the Venus flytrap. Keepers feed it small crawling insects.",
            ),
        ],
    },
    {
        "id": "morse-code",
        "doc": None,
        "turns": [
            (
                "When was the Morse code invented?",
                None,
                "1837",
                "The Morse code was invented in 1837. {pad}",
            ),
            (
                "Which operators used it?",
                "Which operators used the Morse code?",
                "the telegraph clerks",
                "The telegraph clerks used the Morse code. Messages traveled this way from 1837.",
            ),
        ],
    },
    {
        "id": "suez-canal",
        "doc": ("Suez Canal", "The Suez Canal is a waterway dug through the sand."),
        "turns": [
            (
                "How long is the Suez Canal?",
                None,
                "193 kilometres long",
                "The Suez Canal is 193 kilometres long. {pad}",
            ),
            (
                "Which engineer planned it?",
                "Which engineer planned the Suez Canal?",
                "a French diplomat",
                "A French diplomat planned the Suez Canal. The route runs 193 kilometres.",
            ),
        ],
    },
]

_DECOY_ROLES = (
    "manager", "analyst", "clerk", "editor", "pilot", "nurse", "chef", "guard",
    "scout", "teacher", "broker", "typist", "porter", "planner", "auditor",
    "cashier", "courier", "drafter", "fitter", "glazier", "jailer", "keeper",
    "lawyer", "mason", "notary",
)

_FILLER_HEADS = (
    "Bram", "Fern", "Glen", "Marsh", "Thorn", "Wick", "Ash", "Elm", "Hazel",
    "Moss", "Reed", "Stone", "Birch", "Clay",
)

_FILLER_TAILS = (
    "bury", "ford", "stead", "wold", "dale", "haven", "moor", "gate", "combe",
    "leigh", "hollow",
)


def _url(conv_id: str, turn_no: int) -> str:
    return f"fixture://{conv_id}/{turn_no}"


def _build_conversations(spec: list[dict], with_pads: bool) -> tuple[list[Conversation], list[Passage]]:
    conversations: list[Conversation] = []
    passages: list[Passage] = []
    for index, conv in enumerate(spec):
        cid = conv["id"]
        doc = None
        if conv["doc"] is not None:
            doc = DocumentContext(title=conv["doc"][0], first_sentence=conv["doc"][1])
        turns = []
        for turn_no, (question, rewrite, answer, passage_text) in enumerate(conv["turns"]):
            if with_pads and "{pad}" in passage_text:
                passage_text = passage_text.format(pad=_PADS[index % len(_PADS)])
            turns.append(
                Turn(
                    conversation_id=cid,
                    turn_no=turn_no,
                    question=question,
                    rewrite=rewrite,
                    answer=answer,
                    answer_source=_url(cid, turn_no),
                )
            )
            passages.append(
                Passage(
                    passage_id=f"{cid}-p{turn_no}",
                    text=passage_text,
                    source_url=_url(cid, turn_no),
                )
            )
        conversations.append(Conversation(conversation_id=cid, turns=tuple(turns), doc=doc))
    conversations = [build_gold_cg(c) for c in conversations]
    return conversations, passages


def desk_fixture() -> tuple[list[Conversation], list[Passage], dict[str, DocumentContext]]:
    """15 conversations and exactly 200 passages (30 gold, 25 decoys, 145 fillers)."""
    conversations, passages = _build_conversations(_DESK_CONVERSATIONS, with_pads=True)
    for i, role in enumerate(_DECOY_ROLES):
        passages.append(
            Passage(
                passage_id=f"decoy-position-{i:02d}",
                text=f"The {role} position is a demanding one and it calls for steady focus during busy shifts.",
                source_url=f"fixture://decoy/{i}",
            )
        )
    count = 0
    for head in _FILLER_HEADS:
        for tail in _FILLER_TAILS:
            if count >= 145:
                break
            town = head + tail
            passages.append(
                Passage(
                    passage_id=f"filler-{count:03d}",
                    text=(
                        f"Archive note {count:03d} is a short sketch of a quiet town called {town} "
                        "and of the narrow market that is held in it each week."
                    ),
                    source_url=f"fixture://filler/{count}",
                )
            )
            count += 1
    doc_source = {
        c.conversation_id: c.doc for c in conversations if c.doc is not None
    }
    return conversations, passages, doc_source


_ORACLE_CONVERSATIONS = [
    {
        "id": "capital-france",
        "doc": None,
        "turns": [
            ("What is the capital of France?", None, "Paris",
             "The capital of France is Paris. France borders Belgium."),
            ("What about Spain?", "What is the capital of Spain?", "Madrid",
             "The capital of Spain is Madrid. Spain borders Portugal."),
        ],
    },
    {
        "id": "capital-japan",
        "doc": None,
        "turns": [
            ("What is the capital of Japan?", None, "Tokyo",
             "The capital of Japan is Tokyo. Japan sits on four islands."),
            ("What about Kenya?", "What is the capital of Kenya?", "Nairobi",
             "The capital of Kenya is Nairobi. Kenya grows famous coffee."),
        ],
    },
    {
        "id": "currency-mexico",
        "doc": None,
        "turns": [
            ("What currency is used in Mexico?", None, "the peso",
             "The currency used in Mexico is the peso. Mexico adopted the peso early."),
            ("What about India?", "What currency is used in India?", "the rupee",
             "The currency used in India is the rupee. India mints the rupee in silver."),
        ],
    },
    {
        "id": "mountain-nepal",
        "doc": None,
        "turns": [
            ("What is the highest mountain in Nepal?", None, "Mount Everest",
             "The highest mountain in Nepal is Mount Everest. Nepal treasures Mount Everest."),
            ("What about Tanzania?", "What is the highest mountain in Tanzania?", "Mount Kilimanjaro",
             "The highest mountain in Tanzania is Mount Kilimanjaro. Tanzania guards Mount Kilimanjaro."),
        ],
    },
    {
        "id": "novel-dracula",
        "doc": None,
        "turns": [
            ("Who wrote the novel Dracula?", None, "Bram Stoker",
             "The novel Dracula was written by Bram Stoker. Dracula shocked readers in 1897."),
            ("What about Frankenstein?", "Who wrote the novel Frankenstein?", "Mary Shelley",
             "The novel Frankenstein was written by Mary Shelley. Frankenstein appeared in 1818."),
        ],
    },
    {
        "id": "planet-size",
        "doc": None,
        "turns": [
            ("What is the largest planet in the solar system?", None, "Jupiter",
             "The largest planet in the solar system is Jupiter. Jupiter carries many moons."),
            ("What about the smallest?", "What is the smallest planet in the solar system?", "Mercury",
             "The smallest planet in the solar system is Mercury. Mercury hugs the sun."),
        ],
    },
    {
        "id": "element-gold",
        "doc": None,
        "turns": [
            ("What is the chemical symbol for gold?", None, "Au",
             "The chemical symbol for gold is Au. Gold stays dense and soft."),
            ("What about silver?", "What is the chemical symbol for silver?", "Ag",
             "The chemical symbol for silver is Ag. Silver tarnishes in open air."),
        ],
    },
    {
        "id": "language-brazil",
        "doc": None,
        "turns": [
            ("What language is spoken in Brazil?", None, "Portuguese",
             "The language spoken in Brazil is Portuguese. Brazil teaches Portuguese in every school."),
            ("What about Austria?", "What language is spoken in Austria?", "German",
             "The language spoken in Austria is German. Austria prefers German for signs."),
        ],
    },
    {
        "id": "inventor-telephone",
        "doc": None,
        "turns": [
            ("Who invented the telephone?", None, "Alexander Graham Bell",
             "The telephone was invented by Alexander Graham Bell. Bell patented the telephone in 1876."),
            ("What about the radio?", "Who invented the radio?", "Guglielmo Marconi",
             "The radio was invented by Guglielmo Marconi. Marconi sent the first radio signal."),
        ],
    },
    {
        "id": "worldcup",
        "doc": None,
        "turns": [
            ("Which team won the World Cup in 2014?", None, "Germany",
             "Germany won the World Cup in 2014. The team lifted the trophy in Rio."),
            ("What about 1930?", "Which team won the World Cup in 1930?", "Uruguay",
             "Uruguay won the World Cup in 1930. The team beat Argentina in the final."),
        ],
    },
]

_ORACLE_FILLERS = (
    "Honey never spoils inside sealed jars.",
    "Octopus arms hold most of the animal's neurons.",
    "Bamboo shoots climb a full metre within one day.",
    "Glass flows so slowly that panes stay solid for centuries.",
    "Sound needs a medium and cannot cross empty space.",
    "Clouds weigh many tonnes yet float on rising warm air.",
    "Penguins propose with a pebble offered at the nest.",
    "Lightning heats the nearby air five times hotter than the sun.",
    "Maple sap turns to syrup after long hours of boiling.",
    "Camels store fat, not water, in their rounded humps.",
    "Sharks predate trees in the fossil record by millions of summers.",
    "A violin holds seventy separate pieces of carved wood.",
    "Ants farm aphids and milk them for sweet dew.",
    "Corks come from the stripped bark of living oaks.",
    "Owls cannot move their eyes and turn their necks instead.",
)


def oracle_fixture() -> tuple[list[Conversation], list[Passage]]:
    """10 two-turn conversations whose answers are exact reader spans."""
    conversations, passages = _build_conversations(_ORACLE_CONVERSATIONS, with_pads=False)
    for i, text in enumerate(_ORACLE_FILLERS):
        passages.append(
            Passage(passage_id=f"oracle-filler-{i:02d}", text=text, source_url=f"fixture://ofiller/{i}")
        )
    return conversations, passages


_SALARY_CONVERSATION = {
    "id": "salary",
    "doc": None,
    "turns": [
        (
            "What's the average starting salary for a physician assistant in the UK?",
            None,
            "In the UK, the average starting salary for a physician assistant is £30,000.",
            "In the UK, the average starting salary for a physician assistant is £30,000. "
            "Pay rises with national experience.",
        ),
        (
            "What about in the US?",
            "What's the average starting salary for a physician assistant in the US?",
            "In the US, the average starting salary for a physician assistant is $95,000.",
            "In the US, the average starting salary for a physician assistant is $95,000. "
            "Pay varies across fifty states.",
        ),
    ],
}


def salary_fixture() -> tuple[list[Conversation], list[Passage]]:
    """The salary conversation: UK first, then the US follow-up."""
    conversations, passages = _build_conversations([_SALARY_CONVERSATION], with_pads=False)
    for i, text in enumerate(_ORACLE_FILLERS[:4]):
        passages.append(
            Passage(passage_id=f"salary-filler-{i:02d}", text=text, source_url=f"fixture://sfiller/{i}")
        )
    return conversations, passages


def write_fixture_files(out_dir: str | Path) -> dict[str, Path]:
    """Write every fixture set under out_dir; returns the file map."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    files: dict[str, Path] = {}

    desk_convs, desk_passages, doc_source = desk_fixture()
    files["desk_dataset"] = out_dir / "desk_dataset.jsonl"
    files["desk_collection"] = out_dir / "desk_collection.jsonl"
    files["desk_doc_source"] = out_dir / "desk_doc_source.jsonl"
    save_dataset(desk_convs, files["desk_dataset"])
    save_passages(desk_passages, files["desk_collection"])
    save_doc_source(doc_source, files["desk_doc_source"])

    oracle_convs, oracle_passages = oracle_fixture()
    files["oracle_dataset"] = out_dir / "oracle_dataset.jsonl"
    files["oracle_collection"] = out_dir / "oracle_collection.jsonl"
    save_dataset(oracle_convs, files["oracle_dataset"])
    save_passages(oracle_passages, files["oracle_collection"])

    salary_convs, salary_passages = salary_fixture()
    files["salary_dataset"] = out_dir / "salary_dataset.jsonl"
    files["salary_collection"] = out_dir / "salary_collection.jsonl"
    save_dataset(salary_convs, files["salary_dataset"])
    save_passages(salary_passages, files["salary_collection"])
    return files
