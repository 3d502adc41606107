#!/usr/bin/env python3
import bz2
import codecs
import gzip


def smart_open_file(file_input, mode="r", file_encoding="utf-8"):
    """
    Open a text file with different compression format.

    :param file_input: The file path, can be str or Path.
                        The file can be compressed with .gz or .bz2 extension.
    :param mode:    "r" to read or "w" to write.
    :param file_encoding: The encoding of the file, default is 'utf-8'.
    :return: The file object.
    """
    assert mode in ("r", "w"), "The mode must be 'r' or 'w'."
    file_input = str(file_input)
    if file_input.lower()[-3:] == ".gz":
        fi = gzip.open(file_input, mode + "t", encoding=file_encoding)
    elif file_input.lower()[-4:] == ".bz2":
        fi = bz2.open(file_input, mode + "t", encoding=file_encoding)
    else:
        fi = codecs.open(file_input, mode, encoding=file_encoding)
    return fi


def guess_file_type_from_file_name(file_name):
    """Return the file type with the compression suffix stripped, e.g. ".json" for "scene.json.gz"."""
    file_name = str(file_name).lower()
    for suffix in (".gz", ".bz2"):
        if file_name.endswith(suffix):
            file_name = file_name[: -len(suffix)]
    dot = file_name.rfind(".")
    return file_name[dot:] if dot >= 0 else ""
