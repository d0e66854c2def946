import os

from jinja2 import Environment, PackageLoader, select_autoescape

from llpm.errors import ConfigError
from llpm.generators.filters import hex_address
from llpm.generators.generator_c import payload_layout
from llpm.system.bridge import COUNTER_WORDS, CONTROL_COMMIT, STATUS_AVAILABLE, STATUS_SPACE, WORD_BITS

env = Environment(loader=PackageLoader("llpm"), autoescape=select_autoescape(), trim_blocks=True, lstrip_blocks=True)


def underline(text: str, char: str) -> str:
    return char * len(text)


def process(instance, config):
    """Write the RST API page of a host bridge map to config["paths"]["output_file"]."""
    try:
        path = config["paths"]["output_file"]
    except KeyError as error:
        raise ConfigError("RST generation needs paths.output_file") from error

    env.filters["hex_address"] = hex_address
    env.filters["payload_layout"] = payload_layout
    env.filters["underline"] = underline

    template = env.get_template("api.rst.jinja")
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", newline="\n") as output_file:
        print(
            template.render(
                bridge=instance,
                counter_words=COUNTER_WORDS,
                word_bits=WORD_BITS,
                status_available=STATUS_AVAILABLE,
                status_space=STATUS_SPACE,
                control_commit=CONTROL_COMMIT,
            ),
            file=output_file,
        )
    return path
