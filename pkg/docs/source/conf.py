# Sphinx configuration for the kfoldpi documentation.

import os
import sys

sys.path.insert(0, os.path.abspath("../.."))

from kfoldpi import __version__  # noqa: E402

project = 'kfoldpi'
copyright = '2024, kfoldpi developers'
author = 'kfoldpi developers'
release = __version__

extensions = [
   'sphinx.ext.autodoc',
   'sphinx.ext.intersphinx',
   'sphinx.ext.mathjax',
   'sphinx.ext.napoleon',
   'sphinx.ext.viewcode',
]

# docstrings are numpydoc
napoleon_google_docstring = False
napoleon_numpy_docstring = True
napoleon_use_rtype = False

autodoc_member_order = 'bysource'
autodoc_default_options = {
    'members': True,
    'undoc-members': True,
    'show-inheritance': True,
}
autodoc_typehints = 'description'

intersphinx_mapping = {
    'python': ('https://docs.python.org/3', None),
    'numpy': ('https://numpy.org/doc/stable', None),
    'pyarrow': ('https://arrow.apache.org/docs', None),
    'polars': ('https://docs.pola.rs/api/python/stable', None),
}

templates_path = ['_templates']
exclude_patterns = []
pygments_style = 'sphinx'

html_theme = 'sphinx_rtd_theme'
html_static_path = ['_static']
