"""Derived representation stages"""
