from setuptools import setup, find_packages
import pbvqo
import io


with io.open("README.md", encoding="utf-8") as f:
    long_description = f.read()

with io.open("requirements.txt", encoding="utf-8") as f:
    requirements = [r for r in f.read().split('\n') if len(r)]

setup(name="pbvqo",
      version=pbvqo.__version__,
      description="Pulse-based variational quantum optimization on a driven"
                  " superconducting spin ring",
      long_description=long_description,
      long_description_content_type="text/markdown",
      url="",
      license="MIT",
      packages=find_packages(exclude=["tests"]),
      keywords=["quantum", "variational", "pulse", "qaoa", "max-cut"],
      install_requires=requirements,
      entry_points={
          "console_scripts": ["pbvqo = pbvqo.cli:main"],
      },
      )
