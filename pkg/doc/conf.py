# -*- coding: utf-8 -*-
#
# fastpaxos documentation build configuration file.
import os
import sys
sys.path.insert(0, os.path.abspath(".."))

extensions = ['sphinx.ext.autodoc',
              'sphinx.ext.intersphinx',
              'sphinx.ext.autosummary',
              'sphinx.ext.todo',
              'sphinx.ext.coverage',
              'sphinx.ext.viewcode',
              'sphinx.ext.githubpages']

templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'

# General information about the project.
project = 'fastpaxos'
copyright = '2026, fastpaxos developers'
author = 'fastpaxos developers'

version = '0.1'
release = '0.1'

language = None
exclude_patterns = ['_build', 'Thumbs.db', '.DS_Store']
pygments_style = 'sphinx'
todo_include_todos = True

html_theme = 'sphinx_rtd_theme'
html_static_path = ['_static']
htmlhelp_basename = 'fastpaxosdoc'

latex_documents = [
    (master_doc, 'fastpaxos.tex', 'fastpaxos Documentation',
     author, 'manual'),
]

man_pages = [
    (master_doc, 'fastpaxos', 'fastpaxos Documentation',
     [author], 1)
]

intersphinx_mapping = {'https://docs.python.org/': None}
